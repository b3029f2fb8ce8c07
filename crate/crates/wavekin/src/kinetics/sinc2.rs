//! Rate at which `t sinc^2(t x)` approximates the delta function.

use serde::Serialize;

use crate::counting::fejer;
use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, AdaptiveSpec};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sinc2Point {
    pub t: f64,
    /// `t int sinc^2(t x) f(x) dx` over `[-half_width, half_width]`.
    pub integral: f64,
    pub error: f64,
    /// `C(f) t^{-1/2}` with `C(f) = |f|_inf + |f'|_inf`.
    pub bound: f64,
    /// Bound on the dropped tails, `2 sup_{|x| > X} |f| / (pi^2 t X)`.
    pub tail_bound: f64,
    pub quadrature_error: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sinc2Report {
    pub f0: f64,
    pub sup_f: f64,
    pub sup_df: f64,
    pub points: Vec<Sinc2Point>,
    /// Least-squares slope of `-log error` against `log t`.
    pub decay_exponent: f64,
    pub bound_holds: bool,
}

/// Evaluate the approximation error at each `t` and fit its decay rate.
///
/// `half_width` is where `f` is truncated; `tail_sup` bounds `|f|` beyond
/// it.
pub fn sinc2_identity_check(
    f: &(dyn Fn(f64) -> f64 + Sync),
    half_width: f64,
    tail_sup: f64,
    ts: &[f64],
) -> Result<Sinc2Report> {
    if !(half_width > 0.0) || ts.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("need a positive truncation width and positive t".into()));
    }
    // sup norms on a fine sample of the truncated support
    let m = 200_000;
    let h = 2.0 * half_width / m as f64;
    let xs: Vec<f64> = (0..=m).map(|i| -half_width + i as f64 * h).collect();
    let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let sup_f = fx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let sup_df = fx.windows(2).fold(0.0f64, |a, w| a.max(((w[1] - w[0]) / h).abs()));
    let c = sup_f + sup_df;
    let f0 = f(0.0);
    let mut points = Vec::new();
    for &t in ts {
        // breakpoints at the zeros of sinc^2 keep every panel smooth
        let lobes = (t * half_width).floor() as i64;
        let mut bps: Vec<f64> = (-lobes..=lobes).map(|j| j as f64 / t).collect();
        bps.push(-half_width);
        bps.push(half_width);
        let spec = AdaptiveSpec { abs_tol: 1e-14, rel_tol: 1e-13, max_panels: 200_000 };
        let (v, e) = integrate_adaptive(|x| t * fejer(t * x) * f(x), &bps, spec)?;
        let err = (v - f0).abs();
        points.push(Sinc2Point {
            t,
            integral: v,
            error: err,
            bound: c / t.sqrt(),
            tail_bound: 2.0 * tail_sup / (std::f64::consts::PI.powi(2) * t * half_width),
            quadrature_error: e,
        });
    }
    let decay_exponent = decay_fit(&points)?;
    Ok(Sinc2Report { f0, sup_f, sup_df, bound_holds: points.iter().all(|p| p.error <= p.bound), points, decay_exponent })
}

fn decay_fit(points: &[Sinc2Point]) -> Result<f64> {
    if points.len() < 2 {
        return Ok(f64::NAN);
    }
    if points.iter().any(|p| !(p.error > 0.0)) {
        return Ok(f64::INFINITY);
    }
    let n = points.len() as f64;
    let (sx, sy, sxx, sxy) = points.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, p| {
        let (x, y) = (p.t.ln(), p.error.ln());
        (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
    });
    let den = n * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return Err(Error::Usage("need at least two distinct t values".into()));
    }
    Ok(-(n * sxy - sx * sy) / den)
}
