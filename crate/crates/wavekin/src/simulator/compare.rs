use serde::Serialize;

use super::ensemble::EnsembleStats;
use crate::error::{Error, Result};
use crate::kinetics::{collision_kernel, k2_lattice, kernel_is_trivial, K2Options, KernelSpec, ResonantTerms};
use crate::lattice::WaveNumber;
use crate::spectrum::{PhysicalParams, Spectrum};

fn params_of(stats: &EnsembleStats) -> PhysicalParams {
    PhysicalParams::new(stats.l, stats.alpha, stats.t_big, stats.sigma)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResidualRow {
    pub t: f64,
    pub k: f64,
    /// `E|a_k(t)|^2 - n_in(k)`, from the control-variate estimator.
    pub shift: f64,
    pub se: f64,
    /// `(t T / T_kin) K(n_in)(k)`, zero when the kernel is trivial.
    pub kinetic: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SupRatio {
    pub t: f64,
    /// `t T / T_kin`.
    pub tau: f64,
    /// `sup_k |residual| / tau`.
    pub ratio: f64,
    /// Standard error of the maximizing entry, divided by `tau`.
    pub se: f64,
}

/// Residuals against `n_in + (t T / T_kin) K(n_in)` with `T_kin =
/// alpha^-2`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    #[serde(rename = "L")]
    pub l: i64,
    pub sigma: f64,
    pub tkin: f64,
    /// Constant in front of the kernel term of the prediction (fixed).
    pub kinetic_constant: f64,
    /// Least-squares constant `c` in `shift = c tau K`, when `K != 0`.
    pub fitted_constant: Option<f64>,
    pub k_max: f64,
    pub rows: Vec<ResidualRow>,
    pub sup: Vec<SupRatio>,
}

/// Compare ensemble statistics with the kinetic prediction over `|k| <=
/// k_max`.
pub fn compare_to_theorem(
    stats: &EnsembleStats,
    nin: &Spectrum,
    k_max: f64,
    spec: &KernelSpec,
) -> Result<TheoremReport> {
    let p = params_of(stats);
    p.validate()?;
    let l = stats.l;
    let jmax = ((k_max * l as f64 + 1e-9).floor() as i64).min(stats.cutoff);
    let kernel: Vec<f64> = (-jmax..=jmax)
        .map(|j| {
            if kernel_is_trivial(p.sigma) {
                Ok(0.0)
            } else {
                collision_kernel(nin, j as f64 / l as f64, p.sigma, spec)
            }
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut sup = Vec::new();
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, &t) in stats.times.iter().enumerate() {
        let tau = p.t_big * t / p.tkin();
        let mut best = SupRatio { t, tau, ratio: 0.0, se: 0.0 };
        for (m, j) in (-jmax..=jmax).enumerate() {
            let i = stats.index(j);
            let shift = stats.mean_reduced[ti][i];
            let se = stats.se_reduced[ti][i];
            let kinetic = tau * kernel[m];
            let residual = shift - kinetic;
            num += shift * kinetic;
            den += kinetic * kinetic;
            if tau > 0.0 && residual.abs() / tau >= best.ratio {
                best.ratio = residual.abs() / tau;
                best.se = se / tau;
            }
            rows.push(ResidualRow { t, k: j as f64 / l as f64, shift, se, kinetic, residual });
        }
        sup.push(best);
    }
    Ok(TheoremReport {
        l,
        sigma: p.sigma,
        tkin: p.tkin(),
        kinetic_constant: 1.0,
        fitted_constant: (den > 0.0).then(|| num / den),
        k_max,
        rows,
        sup,
    })
}

/// `sup` ratios at the last record time, in the order given, and whether
/// they strictly decrease.
pub fn residual_trend(reports: &[TheoremReport]) -> (Vec<(i64, f64)>, bool) {
    let v: Vec<(i64, f64)> = reports.iter().filter_map(|r| r.sup.last().map(|s| (r.l, s.ratio))).collect();
    let dec = v.len() >= 2 && v.windows(2).all(|w| w[1].1 < w[0].1);
    (v, dec)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentRow {
    pub t: f64,
    pub k: f64,
    pub shift: f64,
    pub se: f64,
    pub predicted: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SecondOrderReport {
    pub rows: Vec<MomentRow>,
    pub max_abs_z: f64,
}

/// Ensemble mean shift against the sum of all couples of order at most 2
/// for the truncated system, `2 alpha^2 s^2 T^2 / L^2 sum F sinc^2` over
/// generic triples of retained modes (twice the lattice sum of the
/// correlation with constant 1).
pub fn second_order_consistency(stats: &EnsembleStats, nin: &Spectrum, modes: &[i64]) -> Result<SecondOrderReport> {
    let p = params_of(stats);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (ti, &t) in stats.times.iter().enumerate() {
        for &j in modes {
            if j.abs() > stats.cutoff {
                return Err(Error::Usage(format!("mode {j} outside the cutoff {}", stats.cutoff)));
            }
            let opt = K2Options { terms: ResonantTerms::Generic, modes: Some(stats.cutoff) };
            let predicted = 2.0 * k2_lattice(&p, t, WaveNumber::new(j, stats.l), nin, opt)?;
            let i = stats.index(j);
            let (shift, se) = (stats.mean_change[ti][i], stats.se_change[ti][i]);
            let z = if se > 0.0 { (shift - predicted) / se } else { 0.0 };
            worst = worst.max(z.abs());
            rows.push(MomentRow { t, k: j as f64 / stats.l as f64, shift, se, predicted, z });
        }
    }
    Ok(SecondOrderReport { rows, max_abs_z: worst })
}
