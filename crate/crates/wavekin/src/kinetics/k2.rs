//! The second-order correlation as an exact lattice sum.

use serde::{Deserialize, Serialize};

use super::kernel::bracket;
use crate::counting::fejer;
use crate::error::{Error, Result};
use crate::lattice::{Dispersion, WaveNumber};
use crate::spectrum::{PhysicalParams, Spectrum};

/// Which `(k1, k3)` enter the sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ResonantTerms {
    /// Only `Omega != 0`.
    #[default]
    Exclude,
    /// Every `(k1, k3)`.
    Include,
    /// `k2` not in `{k1, k3}`, the support of the epsilon factor off the
    /// diagonal.
    Generic,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct K2Options {
    pub terms: ResonantTerms,
    /// Restrict `k1, k2, k3` to numerators `|j| <= modes` (a Galerkin
    /// cutoff); `None` sums over every term the spectrum reaches.
    pub modes: Option<i64>,
}

/// `alpha^2 s^2 T^2 / L^2 sum n n1 n2 n3 [1/n - 1/n1 + 1/n2 - 1/n3]
/// sinc^2(T s Omega)` over `k1 - k2 + k3 = k` with `Omega != 0`.
pub fn k2_discrete(p: &PhysicalParams, s: f64, k: WaveNumber, nin: &Spectrum) -> Result<f64> {
    k2_lattice(p, s, k, nin, K2Options::default())
}

pub fn k2_lattice(p: &PhysicalParams, s: f64, k: WaveNumber, nin: &Spectrum, opt: K2Options) -> Result<f64> {
    p.validate()?;
    nin.validate()?;
    if k.l != p.l {
        return Err(Error::Usage("wavenumber denominator differs from L".into()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("rescaled time {s} outside [0,1]")));
    }
    if s == 0.0 || p.alpha == 0.0 {
        return Ok(0.0);
    }
    let l = p.l;
    let w = nin.window(l);
    // every nonzero term has two of k1, k2, k3 inside the window
    let reach = match opt.modes {
        Some(m) => m,
        None => k.num.abs() + 2 * w,
    };
    let table_half = reach.max(k.num.abs());
    let phi: Vec<f64> = (-table_half..=table_half).map(|j| nin.eval(j as f64 / l as f64)).collect();
    let at = |j: i64| phi[(j + table_half) as usize];
    let disp = Dispersion::new(p.sigma, l);
    let ts = p.t_big * s;
    let kn = k.num;
    let n0 = at(kn);
    let mut sum = 0.0;
    for j1 in -reach..=reach {
        let n1 = at(j1);
        for j3 in -reach..=reach {
            let j2 = j1 + j3 - kn;
            if j2.abs() > reach {
                continue;
            }
            let keep = match opt.terms {
                ResonantTerms::Include => true,
                ResonantTerms::Exclude => !disp.is_resonant(j1, j2, j3, kn),
                ResonantTerms::Generic => j2 != j1 && j2 != j3,
            };
            if !keep {
                continue;
            }
            let f = bracket(n0, n1, at(j2), at(j3));
            if f == 0.0 {
                continue;
            }
            sum += f * fejer(ts * disp.resonance(j1, j2, j3, kn));
        }
    }
    let lf = l as f64;
    Ok(p.alpha * p.alpha * ts * ts / (lf * lf) * sum)
}

/// `t / T_kin` for rescaled time `s`, i.e. `alpha^2 T s`.
pub fn kinetic_time_ratio(p: &PhysicalParams, s: f64) -> f64 {
    p.t_big * s / p.tkin()
}
