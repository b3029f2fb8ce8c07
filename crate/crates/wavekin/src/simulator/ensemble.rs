use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, first_increment, max_step};
use super::rhs::Nonlinearity;
use super::state::{cutoff_numerator, sample_initial_data, InitialKind};
use crate::error::{Error, Result};
use crate::spectrum::{PhysicalParams, Spectrum};

/// Fewest members for which a standard error exists.
pub const MIN_MEMBERS: usize = 2;

/// `T` at the edge of the theorem windows, shortened by `L^-epsilon`.
pub fn theorem_time(l: i64, gamma: f64, sigma: f64, epsilon: f64) -> f64 {
    let lf = l as f64;
    let nls = lf.powf(1.25 * gamma);
    let cap = if sigma == 2.0 {
        nls
    } else if sigma > 1.0 {
        lf.min(nls)
    } else {
        lf.powf(1.0 / (2.0 - sigma)).min(nls)
    };
    cap * lf.powf(-epsilon)
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_spectrum() -> Spectrum {
    Spectrum::Gaussian { amplitude: 1.0, width: 0.5, cutoff: None }
}

/// Ensemble configuration; also the schema of the `simulate` config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Defaults to [`theorem_time`] when absent.
    #[serde(rename = "T", default)]
    pub t_big: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub sigma: f64,
    /// Largest `|k|` retained.
    pub cutoff: f64,
    /// Defaults to the phase-resolution limit.
    #[serde(default)]
    pub dt: Option<f64>,
    pub members: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Rescaled record times in `(0, 1]`.
    pub times: Vec<f64>,
    #[serde(default)]
    pub kind: InitialKind,
    #[serde(default = "default_spectrum")]
    pub spectrum: Spectrum,
}

impl EnsembleConfig {
    pub fn new(l: i64, gamma: f64, sigma: f64, members: usize, times: Vec<f64>) -> Self {
        EnsembleConfig {
            l,
            alpha: None,
            gamma: Some(gamma),
            t_big: None,
            epsilon: default_epsilon(),
            sigma,
            cutoff: 2.5,
            dt: None,
            members,
            seed_base: 0,
            times,
            kind: InitialKind::Gaussian,
            spectrum: default_spectrum(),
        }
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let p = match (self.alpha, self.gamma) {
            (Some(_), Some(_)) => return Err(Error::Usage("give alpha or gamma, not both".into())),
            (None, None) => return Err(Error::Usage("one of alpha or gamma is required".into())),
            (Some(a), None) => {
                let t = self.t_big.ok_or_else(|| Error::Usage("T is required when alpha is given".into()))?;
                PhysicalParams::new(self.l, a, t, self.sigma)
            }
            (None, Some(g)) => {
                let t = self.t_big.unwrap_or_else(|| theorem_time(self.l, g, self.sigma, self.epsilon));
                PhysicalParams::with_gamma(self.l, g, t, self.sigma)
            }
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.members < MIN_MEMBERS {
            return Err(Error::Usage(format!("members must be at least {MIN_MEMBERS}, got {}", self.members)));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
            return Err(Error::Usage("times must be nonempty and lie in (0, 1]".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("times must increase".into()));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::Usage("cutoff must be positive".into()));
        }
        self.spectrum.validate()?;
        self.params().map(|_| ())
    }

    pub fn seeds(&self) -> std::ops::Range<u64> {
        self.seed_base..self.seed_base + self.members as u64
    }
}

/// Per-mode sample moments of `|a_j(t)|^2`, of the change
/// `|a_j(t)|^2 - |a_j(0)|^2`, and of the change with the first-order
/// control variate removed. The three estimate the same mean shift with
/// decreasing variance.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnsembleStats {
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "T")]
    pub t_big: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub cutoff: i64,
    pub times: Vec<f64>,
    pub members: usize,
    pub seed_base: u64,
    pub dropped_seeds: Vec<u64>,
    pub dt: f64,
    pub max_mass_drift: f64,
    /// `[time][mode]`, modes in numerator order `-cutoff..=cutoff`.
    pub mean_sq: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub mean_change: Vec<Vec<f64>>,
    pub se_change: Vec<Vec<f64>>,
    pub mean_reduced: Vec<Vec<f64>>,
    pub se_reduced: Vec<Vec<f64>>,
    pub seconds: f64,
}

impl EnsembleStats {
    pub fn used(&self) -> usize {
        self.members - self.dropped_seeds.len()
    }

    pub fn index(&self, j: i64) -> usize {
        (j + self.cutoff) as usize
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("t,k,meanSq,se,meanChange,seChange,meanReduced,seReduced\n");
        for (ti, t) in self.times.iter().enumerate() {
            for j in -self.cutoff..=self.cutoff {
                let i = self.index(j);
                s.push_str(&format!(
                    "{t},{},{},{},{},{},{},{}\n",
                    j as f64 / self.l as f64,
                    self.mean_sq[ti][i],
                    self.se[ti][i],
                    self.mean_change[ti][i],
                    self.se_change[ti][i],
                    self.mean_reduced[ti][i],
                    self.se_reduced[ti][i]
                ));
            }
        }
        s
    }
}

struct Member {
    sq: Vec<f64>,
    change: Vec<f64>,
    reduced: Vec<f64>,
    drift: f64,
}

fn run_member(cfg: &EnsembleConfig, nl: &Nonlinearity, dt: f64, seed: u64) -> Result<Member> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s0 = sample_initial_data(&cfg.spectrum, cfg.l, nl.cutoff, cfg.kind, &mut rng)?;
    let tr = evolve(&s0, &cfg.times, dt, nl)?;
    let b = first_increment(&s0, &cfg.times, dt, nl);
    let n = s0.len();
    let mut sq = Vec::with_capacity(cfg.times.len() * n);
    let mut change = Vec::with_capacity(cfg.times.len() * n);
    let mut reduced = Vec::with_capacity(cfg.times.len() * n);
    for (st, b) in tr.states.iter().zip(&b) {
        for i in 0..n {
            let v = st.a[i].norm_sqr();
            let d = v - s0.a[i].norm_sqr();
            sq.push(v);
            change.push(d);
            reduced.push(d - 2.0 * (s0.a[i].conj() * b[i]).re);
        }
    }
    Ok(Member { sq, change, reduced, drift: tr.mass_drift })
}

/// Run every member (in parallel, reduced in seed order) and collect
/// per-mode statistics. Failing members are dropped and listed.
pub fn ensemble_second_moment(cfg: &EnsembleConfig) -> Result<EnsembleStats> {
    cfg.validate()?;
    let t0 = std::time::Instant::now();
    let p = cfg.params()?;
    let cutoff = cutoff_numerator(cfg.l, cfg.cutoff);
    let nl = Nonlinearity::new(p, cutoff)?;
    let dt = cfg.dt.unwrap_or_else(|| max_step(&nl).min(0.05));
    let n = (2 * cutoff + 1) as usize;
    let width = cfg.times.len() * n;
    let (mut s1, mut s2, mut c1, mut c2) = (vec![0.0; width], vec![0.0; width], vec![0.0; width], vec![0.0; width]);
    let (mut r1, mut r2) = (vec![0.0; width], vec![0.0; width]);
    let mut dropped = Vec::new();
    let mut drift = 0.0f64;
    let seeds: Vec<u64> = cfg.seeds().collect();
    for chunk in seeds.chunks(512) {
        let results: Vec<(u64, Result<Member>)> =
            chunk.par_iter().map(|&seed| (seed, run_member(cfg, &nl, dt, seed))).collect();
        for (seed, r) in results {
            match r {
                Ok(m) => {
                    drift = drift.max(m.drift);
                    for i in 0..width {
                        s1[i] += m.sq[i];
                        s2[i] += m.sq[i] * m.sq[i];
                        c1[i] += m.change[i];
                        c2[i] += m.change[i] * m.change[i];
                        r1[i] += m.reduced[i];
                        r2[i] += m.reduced[i] * m.reduced[i];
                    }
                }
                Err(e) if matches!(e, Error::Numeric { .. }) => dropped.push(seed),
                Err(e) => return Err(e),
            }
        }
    }
    let used = cfg.members - dropped.len();
    if used < MIN_MEMBERS {
        return Err(Error::Numeric { message: format!("only {used} members survived"), residual: drift });
    }
    let nf = used as f64;
    let moments = |a: &[f64], b: &[f64]| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mean: Vec<f64> = a.iter().map(|x| x / nf).collect();
        let se: Vec<f64> =
            a.iter().zip(b).map(|(x, y)| ((y - x * x / nf).max(0.0) / (nf - 1.0) / nf).sqrt()).collect();
        (mean.chunks(n).map(<[f64]>::to_vec).collect(), se.chunks(n).map(<[f64]>::to_vec).collect())
    };
    let (mean_sq, se) = moments(&s1, &s2);
    let (mean_change, se_change) = moments(&c1, &c2);
    let (mean_reduced, se_reduced) = moments(&r1, &r2);
    Ok(EnsembleStats {
        l: cfg.l,
        t_big: p.t_big,
        alpha: p.alpha,
        sigma: p.sigma,
        cutoff,
        times: cfg.times.clone(),
        members: cfg.members,
        seed_base: cfg.seed_base,
        dropped_seeds: dropped,
        dt,
        max_mass_drift: drift,
        mean_sq,
        se,
        mean_change,
        se_change,
        mean_reduced,
        se_reduced,
        seconds: t0.elapsed().as_secs_f64(),
    })
}
