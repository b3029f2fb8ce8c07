use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Law of the unit random variables `g_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InitialKind {
    /// Standard complex Gaussian, `E|g|^2 = 1`.
    #[default]
    Gaussian,
    /// Uniform on the unit circle.
    RandomPhase,
}

impl std::str::FromStr for InitialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(InitialKind::Gaussian),
            "randomPhase" | "random-phase" | "phase" => Ok(InitialKind::RandomPhase),
            _ => Err(Error::Usage(format!("unknown initial data kind `{s}`"))),
        }
    }
}

/// Profiles `a_j(t)` for numerators `-cutoff..=cutoff` over `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    #[serde(rename = "L")]
    pub l: i64,
    pub cutoff: i64,
    /// Rescaled time in `[0, 1]`.
    pub t: f64,
    pub a: Vec<Complex64>,
}

impl ModeState {
    pub fn zeros(l: i64, cutoff: i64) -> Self {
        ModeState { l, cutoff, t: 0.0, a: vec![Complex64::new(0.0, 0.0); (2 * cutoff + 1) as usize] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Mode with numerator `j`.
    pub fn get(&self, j: i64) -> Complex64 {
        self.a[(j + self.cutoff) as usize]
    }

    pub fn numerators(&self) -> impl Iterator<Item = i64> {
        -self.cutoff..=self.cutoff
    }

    /// `L^-1 sum |a_j|^2`.
    pub fn mass(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.l as f64
    }
}

/// Largest numerator with `|j / L| <= k_max`.
pub fn cutoff_numerator(l: i64, k_max: f64) -> i64 {
    (k_max * l as f64 + 1e-9).floor() as i64
}

/// `a_j(0) = sqrt(n_in(j/L)) g_j`, independent over `j`.
pub fn sample_initial_data<R: Rng + ?Sized>(
    nin: &Spectrum,
    l: i64,
    cutoff: i64,
    kind: InitialKind,
    rng: &mut R,
) -> Result<ModeState> {
    nin.validate()?;
    if l < 1 || cutoff < 0 {
        return Err(Error::Domain("need L >= 1 and cutoff >= 0".into()));
    }
    let mut s = ModeState::zeros(l, cutoff);
    for (i, j) in (-cutoff..=cutoff).enumerate() {
        let amp = nin.eval(j as f64 / l as f64).sqrt();
        let g = match kind {
            InitialKind::Gaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            InitialKind::RandomPhase => {
                let th: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(1.0, th)
            }
        };
        s.a[i] = g * amp;
    }
    Ok(s)
}
