//! The collision operator on the resonant manifold.
//!
//! For fixed `xi` and `xi1` the resonance function
//! `g(xi3) = w(xi1) - w(xi1 + xi3 - xi) + w(xi3) - w(xi)` has derivative
//! `sigma (sgn(xi3)|xi3|^{s-1} - sgn(xi2)|xi2|^{s-1})`, which only vanishes
//! when `xi1 = xi`. Away from that line `g` is strictly monotone between its
//! cusps `{0, xi - xi1}`, so each branch carries at most one root and the
//! substitution `s = g(xi3)` is one-to-one there.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::omega;
use crate::quad::{gauss_legendre, integrate_adaptive, AdaptiveSpec};
use crate::spectrum::Spectrum;

/// Quadrature resolution for kernel evaluations.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec { abs_tol: 1e-11, rel_tol: 1e-9, max_panels: 6000 }
    }
}

impl KernelSpec {
    /// Tolerances scaled by `factor` (smaller is finer).
    pub fn scaled(self, factor: f64) -> Self {
        KernelSpec { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, max_panels: self.max_panels * 4 }
    }

    fn adaptive(&self) -> AdaptiveSpec {
        AdaptiveSpec { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_panels: self.max_panels }
    }

    fn inner(&self) -> AdaptiveSpec {
        AdaptiveSpec { abs_tol: self.abs_tol * 1e-2, rel_tol: self.rel_tol * 1e-1, max_panels: self.max_panels }
    }
}

/// `n n1 n2 n3 (1/n - 1/n1 + 1/n2 - 1/n3)` in product form, so zeros of `n`
/// are harmless.
#[inline]
pub fn bracket(n: f64, n1: f64, n2: f64, n3: f64) -> f64 {
    n1 * n2 * n3 - n * n2 * n3 + n * n1 * n3 - n * n1 * n2
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 2.0) || sigma == 1.0 {
        return Err(Error::Domain(format!("sigma {sigma} outside (0,2] minus {{1}}")));
    }
    Ok(())
}

/// Whether every resonance is trivial, so the kernel vanishes identically.
pub fn kernel_is_trivial(sigma: f64) -> bool {
    sigma > 1.0
}

struct Slice<'a> {
    n: &'a Spectrum,
    xi: f64,
    x1: f64,
    sigma: f64,
    nxi: f64,
    n1: f64,
    base: f64,
}

impl<'a> Slice<'a> {
    fn new(n: &'a Spectrum, xi: f64, x1: f64, sigma: f64) -> Self {
        let base = omega(x1, sigma) - omega(xi, sigma);
        Slice { n, xi, x1, sigma, nxi: n.eval(xi), n1: n.eval(x1), base }
    }

    #[inline]
    fn g(&self, x3: f64) -> f64 {
        self.base - omega(self.x1 + x3 - self.xi, self.sigma) + omega(x3, self.sigma)
    }

    #[inline]
    fn dg(&self, x3: f64) -> f64 {
        let p = |x: f64| x.signum() * x.abs().powf(self.sigma - 1.0);
        self.sigma * (p(x3) - p(self.x1 + x3 - self.xi))
    }

    #[inline]
    fn f(&self, x3: f64) -> f64 {
        let x2 = self.x1 + x3 - self.xi;
        bracket(self.nxi, self.n1, self.n.eval(x2), self.n.eval(x3))
    }

    /// Monotone branches of `g` inside `[-b, b]`.
    fn branches(&self, b: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![-b, b];
        for c in [0.0, self.xi - self.x1] {
            if c > -b && c < b {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, c)| c > a).collect()
    }

    /// Point in `[a, c]` where the monotone `g` crosses `level`, if any.
    fn crossing(&self, a: f64, c: f64, level: f64) -> Option<f64> {
        let (ga, gc) = (self.g(a) - level, self.g(c) - level);
        if ga == 0.0 {
            return Some(a);
        }
        if gc == 0.0 {
            return Some(c);
        }
        if ga.signum() == gc.signum() {
            return None;
        }
        let (mut lo, mut hi) = (a, c);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.g(mid) - level).signum() == ga.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

fn domain_bound(n: &Spectrum, xi: f64) -> f64 {
    xi.abs() + 2.0 * n.support_radius()
}

/// `K(n)(xi)` for one `xi`.
///
/// For `sigma > 1` every resonance is trivial and the bracket vanishes on
/// it, so the value is exactly zero. For `sigma < 1` the inner delta
/// integral is the sum over branch roots of `F / |dg/dxi3|`.
pub fn collision_kernel(n: &Spectrum, xi: f64, sigma: f64, spec: &KernelSpec) -> Result<f64> {
    check_sigma(sigma)?;
    n.validate()?;
    if kernel_is_trivial(sigma) {
        return Ok(0.0);
    }
    let b = domain_bound(n, xi);
    let h = |x1: f64| -> f64 {
        let sl = Slice::new(n, xi, x1, sigma);
        let mut acc = 0.0;
        for (a, c) in sl.branches(b) {
            if let Some(r) = sl.crossing(a, c, 0.0) {
                // roots on a cusp have infinite slope and contribute nothing
                if r == a || r == c || r == 0.0 || r == xi - x1 {
                    continue;
                }
                let jac = sl.dg(r).abs();
                if jac > 0.0 {
                    acc += sl.f(r) / jac;
                }
            }
        }
        acc
    };
    let (v, _) = integrate_adaptive(h, &[-b, 0.0, xi, b], spec.adaptive())?;
    Ok(v)
}

/// `(1/(2w)) int int_{|Omega| <= w} F dxi1 dxi3`, the near-resonant
/// surrogate of the kernel. It tends to `K(n)(xi)` as `w -> 0`, hence to 0
/// for `sigma > 1`.
pub fn windowed_kernel(n: &Spectrum, xi: f64, sigma: f64, w: f64, spec: &KernelSpec) -> Result<f64> {
    check_sigma(sigma)?;
    n.validate()?;
    if !(w > 0.0) {
        return Err(Error::Domain("window half-width must be positive".into()));
    }
    let b = domain_bound(n, xi);
    let mut failure: Option<Error> = None;
    let h = |x1: f64| -> f64 {
        let sl = Slice::new(n, xi, x1, sigma);
        let mut acc = 0.0;
        for (a, c) in sl.branches(b) {
            let (ga, gc) = (sl.g(a), sl.g(c));
            let (glo, ghi) = (ga.min(gc), ga.max(gc));
            if glo > w || ghi < -w {
                continue;
            }
            // sublevel set of a monotone function is an interval
            let p = if ga.abs() <= w { a } else { sl.crossing(a, c, if ga > w { w } else { -w }).unwrap_or(a) };
            let q = if gc.abs() <= w { c } else { sl.crossing(a, c, if gc > w { w } else { -w }).unwrap_or(c) };
            let (lo, hi) = (p.min(q), p.max(q));
            if hi > lo {
                match integrate_adaptive(|x3| sl.f(x3), &[lo, hi], spec.inner()) {
                    Ok((v, _)) => acc += v,
                    Err(e) => {
                        failure.get_or_insert(e);
                    }
                }
            }
        }
        acc
    };
    let (v, _) = integrate_adaptive(h, &[-b, 0.0, xi - w, xi, xi + w, b], spec.adaptive())?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(v / (2.0 * w))
}

/// Kernel values on a grid of `xi`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelGrid {
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub quad_spec: KernelSpec,
}

impl KernelGrid {
    /// Trapezoid sums `(sum K dxi, sum w(xi) K dxi, sum |K| dxi)`.
    pub fn moments(&self) -> (f64, f64, f64) {
        let mut m = (0.0, 0.0, 0.0);
        for i in 0..self.xi.len() {
            let left = if i > 0 { self.xi[i] - self.xi[i - 1] } else { 0.0 };
            let right = if i + 1 < self.xi.len() { self.xi[i + 1] - self.xi[i] } else { 0.0 };
            let dx = 0.5 * (left + right);
            let k = self.values[i];
            m.0 += k * dx;
            m.1 += omega(self.xi[i], self.sigma) * k * dx;
            m.2 += k.abs() * dx;
        }
        m
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("xi,value\n");
        for (x, v) in self.xi.iter().zip(&self.values) {
            s.push_str(&format!("{x},{v}\n"));
        }
        s
    }
}

/// Evaluate the kernel on every grid point, in parallel.
pub fn kernel_grid(n: &Spectrum, xi: &[f64], sigma: f64, spec: &KernelSpec) -> Result<KernelGrid> {
    let values = xi.par_iter().map(|&x| collision_kernel(n, x, sigma, spec)).collect::<Result<Vec<f64>>>()?;
    Ok(KernelGrid { xi: xi.to_vec(), values, sigma, quad_spec: *spec })
}

/// Parse `lo:hi:step` into an inclusive grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad grid `{s}`, expected lo:hi:step"))))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(Error::Usage(format!("bad grid `{s}`, expected lo:hi:step")));
    };
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::Usage(format!("bad grid `{s}`: need hi >= lo and step > 0")));
    }
    let m = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=m).map(|i| lo + i as f64 * step).collect())
}

/// Mass and energy balance of the kernel, `int K dxi` and
/// `int w(xi) K dxi`, by adaptive quadrature in `xi`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConservationReport {
    pub sigma: f64,
    pub mass: f64,
    pub energy: f64,
    /// `int |K| dxi`, the scale the two balances are measured against.
    pub scale: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn kernel_conservation(n: &Spectrum, sigma: f64, spec: &KernelSpec, rel_tol: f64) -> Result<ConservationReport> {
    check_sigma(sigma)?;
    n.validate()?;
    // composite Gauss-Legendre, panels graded geometrically towards the
    // kink at 0; one set of kernel samples feeds all three integrals
    let b = 3.0 * n.support_radius();
    let mut cuts = vec![0.0];
    let mut x = 1e-5;
    while x < 1.0 {
        cuts.push(x);
        x *= 2.0;
    }
    let mut y = 1.0;
    while y < b {
        cuts.push(y);
        y += 0.5;
    }
    cuts.push(b);
    let mut panels: Vec<(f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    panels.extend(panels.clone().into_iter().map(|(a, c)| (-c, -a)));
    let (gx, gw) = gauss_legendre(20);
    let nodes: Vec<(f64, f64)> = panels
        .iter()
        .flat_map(|&(a, c)| {
            let (m, h) = (0.5 * (a + c), 0.5 * (c - a));
            gx.iter().zip(&gw).map(move |(x, w)| (m + h * x, h * w)).collect::<Vec<_>>()
        })
        .collect();
    let values = nodes.par_iter().map(|&(x, _)| collision_kernel(n, x, sigma, spec)).collect::<Result<Vec<f64>>>()?;
    let (mut mass, mut energy, mut scale) = (0.0, 0.0, 0.0);
    for (&(x, w), k) in nodes.iter().zip(&values) {
        mass += w * k;
        energy += w * omega(x, sigma) * k;
        scale += w * k.abs();
    }
    let tol = rel_tol * scale.max(f64::MIN_POSITIVE);
    Ok(ConservationReport { sigma, mass, energy, scale, tol, pass: mass.abs() <= tol && energy.abs() <= tol })
}
