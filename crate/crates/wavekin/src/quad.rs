//! Quadrature rules: Gauss–Legendre with a spectral integration matrix and
//! adaptive Gauss–Kronrod.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// A Gauss–Legendre rule together with its indefinite-integration matrix
/// `S[i][j] = ∫_{-1}^{x_i} l_j(x) dx`, where `l_j` is the Lagrange basis on
/// the nodes. Integrating the interpolant is exact for polynomials of
/// degree below `n`.
#[derive(Clone, Debug)]
pub struct SpectralRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub integ: Vec<Vec<f64>>,
}

impl SpectralRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        let bary: Vec<f64> = (0..n)
            .map(|j| 1.0 / (0..n).filter(|&m| m != j).map(|m| nodes[j] - nodes[m]).product::<f64>())
            .collect();
        let lagrange = |j: usize, y: f64| -> f64 {
            let mut v = bary[j];
            for m in 0..n {
                if m != j {
                    v *= y - nodes[m];
                }
            }
            v
        };
        let integ = (0..n)
            .map(|i| {
                let half = 0.5 * (nodes[i] + 1.0);
                (0..n)
                    .map(|j| {
                        let mut acc = 0.0;
                        for m in 0..n {
                            let y = -1.0 + half * (nodes[m] + 1.0);
                            acc += weights[m] * lagrange(j, y);
                        }
                        acc * half
                    })
                    .collect()
            })
            .collect();
        SpectralRule { nodes, weights, integ }
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Tolerances for adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        AdaptiveSpec { abs_tol: 1e-12, rel_tol: 1e-10, max_panels: 4000 }
    }
}

/// Globally adaptive Gauss–Kronrod over `[a, b]` with forced breakpoints.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    spec: AdaptiveSpec,
) -> Result<(f64, f64)> {
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
    if pts.len() < 2 {
        return Ok((0.0, 0.0));
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if panels.len() >= spec.max_panels {
            return Err(Error::Numeric { message: "adaptive quadrature did not converge".into(), residual: err });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("nonempty");
        let (a, b, _, _) = panels.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn integration_matrix_is_exact_on_low_degree() {
        let r = SpectralRule::new(16);
        for i in 0..16 {
            let xi = r.nodes[i];
            let v: f64 = (0..16).map(|j| r.integ[i][j] * r.nodes[j].powi(5)).sum();
            let exact = (xi.powi(6) - 1.0) / 6.0;
            assert!((v - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        let (v, _) = integrate_adaptive(|x: f64| x.abs(), &[-1.0, 0.3, 2.0], AdaptiveSpec::default()).unwrap();
        assert!((v - 2.5).abs() <= 2.5e-10, "{v}");
        let (v, _) = integrate_adaptive(|x: f64| (-x * x).exp(), &[-10.0, 10.0], AdaptiveSpec::default()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }
}
