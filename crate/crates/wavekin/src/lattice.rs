//! Wavenumbers on the rescaled lattice `(1/L)Z` and the dispersion relation.

use serde::{Deserialize, Serialize};

/// An element of `(1/L)Z`, stored as an exact numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveNumber {
    pub num: i64,
    #[serde(rename = "L")]
    pub l: i64,
}

impl WaveNumber {
    pub fn new(num: i64, l: i64) -> Self {
        assert!(l > 0, "lattice size must be positive");
        WaveNumber { num, l }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.l as f64
    }
}

/// `omega(x) = |x|^sigma`.
#[inline]
pub fn omega(x: f64, sigma: f64) -> f64 {
    if sigma == 2.0 {
        x * x
    } else {
        x.abs().powf(sigma)
    }
}

/// Dispersion evaluated on lattice numerators.
///
/// For `sigma = 2` resonance factors are formed from exact integer sums so
/// that `Omega == 0` is decided without rounding.
#[derive(Clone, Copy, Debug)]
pub struct Dispersion {
    pub sigma: f64,
    pub l: i64,
}

impl Dispersion {
    pub fn new(sigma: f64, l: i64) -> Self {
        Dispersion { sigma, l }
    }

    #[inline]
    pub fn w(&self, j: i64) -> f64 {
        if self.sigma == 2.0 {
            (j * j) as f64 / (self.l * self.l) as f64
        } else {
            (j.abs() as f64 / self.l as f64).powf(self.sigma)
        }
    }

    /// `w(j1) - w(j2) + w(j3) - w(j)`.
    #[inline]
    pub fn resonance(&self, j1: i64, j2: i64, j3: i64, j: i64) -> f64 {
        if self.sigma == 2.0 {
            let num = j1 * j1 - j2 * j2 + j3 * j3 - j * j;
            num as f64 / (self.l * self.l) as f64
        } else {
            self.w(j1) - self.w(j2) + self.w(j3) - self.w(j)
        }
    }

    /// Whether the resonance factor vanishes exactly (sigma = 2) or to
    /// rounding otherwise.
    #[inline]
    pub fn is_resonant(&self, j1: i64, j2: i64, j3: i64, j: i64) -> bool {
        if self.sigma == 2.0 {
            j1 * j1 - j2 * j2 + j3 * j3 - j * j == 0
        } else {
            let scale = self.w(j1) + self.w(j2) + self.w(j3) + self.w(j);
            self.resonance(j1, j2, j3, j).abs() <= 1e-13 * scale.max(1e-300)
        }
    }
}
