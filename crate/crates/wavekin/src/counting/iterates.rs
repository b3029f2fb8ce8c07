//! Lattice sums of `W(k1,k3) psi(T Omega)` against their Poisson
//! approximation by the integrals with `|f1|, |f3| <= R`.
//!
//! `W` is a centred Gaussian, `psi(x) = sinc^2(x)` (its Fourier transform is
//! supported in `[-1, 1]`), and
//! `Omega = |k1|^s - |k - k1 - k3|^s + |k3|^s - |k|^s`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::omega;
use crate::quad::{integrate_adaptive, AdaptiveSpec};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterateConfig {
    /// `k` as a numerator over `L`.
    pub k: i64,
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    pub delta: f64,
    /// `W(u) = amplitude * exp(-|u|^2 / width^2)`; `amplitude = 0` gives
    /// `W = 0`.
    pub width: f64,
    pub amplitude: f64,
    /// Sum and integrate over `|u_i| <= cutoff * width`.
    pub cutoff: f64,
}

impl IterateConfig {
    pub fn new(l: i64, t: f64, sigma: f64) -> Self {
        IterateConfig { k: 0, l, t, sigma, delta: 0.05, width: 1.0, amplitude: 1.0, cutoff: 7.0 }
    }

    /// `R = max(T, T^{2-sigma}) L^{-1+3 delta}`.
    pub fn radius(&self) -> f64 {
        self.t.max(self.t.powf(2.0 - self.sigma)) * (self.l as f64).powf(-1.0 + 3.0 * self.delta)
    }

    fn w(&self, u1: f64, u3: f64) -> f64 {
        self.amplitude * (-(u1 * u1 + u3 * u3) / (self.width * self.width)).exp()
    }

    fn phase(&self, u1: f64, u3: f64) -> f64 {
        let k = self.k as f64 / self.l as f64;
        let s = self.sigma;
        omega(u1, s) - omega(k - u1 - u3, s) + omega(u3, s) - omega(k, s)
    }
}

/// `sinc^2(x) = (sin(pi x) / (pi x))^2`.
pub fn fejer(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        let y = std::f64::consts::PI * x;
        (y.sin() / y).powi(2)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IterateReport {
    pub config: IterateConfig,
    pub radius: f64,
    /// Frequencies `(f1, f3)` kept on the integral side.
    pub frequencies: usize,
    pub lattice_sum: f64,
    pub integral_sum: f64,
    pub quadrature_error: f64,
    pub discrepancy: f64,
    /// `discrepancy / (L^2 T^{-1})`.
    pub normalized: f64,
}

/// Lattice side.
pub fn iterate_lattice_sum(cfg: &IterateConfig) -> f64 {
    if cfg.amplitude == 0.0 {
        return 0.0;
    }
    let l = cfg.l as f64;
    let m = (cfg.cutoff * cfg.width * l).ceil() as i64;
    let mut total = 0.0;
    for n1 in -m..=m {
        let u1 = n1 as f64 / l;
        for n3 in -m..=m {
            let u3 = n3 as f64 / l;
            total += cfg.w(u1, u3) * fejer(cfg.t * cfg.phase(u1, u3));
        }
    }
    total
}

/// Integral side, `sum_{|f| <= R} L^2 int W psi(T Omega) e(-L u.f) du`.
/// The frequency set is symmetric, so only cosines survive.
pub fn iterate_integral_sum(cfg: &IterateConfig) -> Result<(f64, f64, usize)> {
    if cfg.amplitude == 0.0 {
        return Ok((0.0, 0.0, 0));
    }
    let r = cfg.radius().floor() as i64;
    let freqs: Vec<(i64, i64)> = (-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).collect();
    let l = cfg.l as f64;
    let k = cfg.k as f64 / l;
    let half = cfg.cutoff * cfg.width;
    let two_pi_l = 2.0 * std::f64::consts::PI * l;
    let inner_spec = AdaptiveSpec { abs_tol: 1e-13, rel_tol: 1e-10, max_panels: 20_000 };
    let outer_spec = AdaptiveSpec { abs_tol: 1e-11, rel_tol: 1e-9, max_panels: 20_000 };
    let mut inner_err = 0.0f64;
    let mut failure: Option<Error> = None;
    let outer = |u1: f64| -> f64 {
        let g = |u3: f64| {
            let osc: f64 = freqs.iter().map(|&(f1, f3)| (two_pi_l * (u1 * f1 as f64 + u3 * f3 as f64)).cos()).sum();
            cfg.w(u1, u3) * fejer(cfg.t * cfg.phase(u1, u3)) * osc
        };
        let bps = [-half, 0.0, k, k - u1, half].map(|x| x.clamp(-half, half));
        match integrate_adaptive(g, &bps, inner_spec) {
            Ok((v, e)) => {
                inner_err = inner_err.max(e);
                v
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let (v, e) = integrate_adaptive(outer, &[-half, 0.0, k.clamp(-half, half), half], outer_spec)?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok((l * l * v, l * l * (e + 2.0 * half * inner_err), freqs.len()))
}

/// Both sides and their normalized discrepancy.
pub fn iterate_sum_vs_integral(cfg: &IterateConfig) -> Result<IterateReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0 / 3.0) || !(cfg.t > 0.0) || cfg.l < 1 || !(cfg.width > 0.0) {
        return Err(Error::Domain("need 0 < delta < 1/3, T > 0, L >= 1, width > 0".into()));
    }
    let lattice_sum = iterate_lattice_sum(cfg);
    let (integral_sum, quadrature_error, frequencies) = iterate_integral_sum(cfg)?;
    let discrepancy = (lattice_sum - integral_sum).abs();
    let l = cfg.l as f64;
    Ok(IterateReport {
        config: cfg.clone(),
        radius: cfg.radius(),
        frequencies,
        lattice_sum,
        integral_sum,
        quadrature_error,
        discrepancy,
        normalized: discrepancy / (l * l / cfg.t),
    })
}
