//! Initial spectra and physical parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonnegative initial spectrum `n_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Spectrum {
    /// `amplitude * exp(-(x/width)^2)`, set to zero for `|x| > cutoff`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        cutoff: Option<f64>,
    },
    /// Linear interpolation of samples on an increasing grid with an
    /// exponential tail `n_edge * exp(-decay (|x| - |x_edge|))` outside it.
    #[serde(rename_all = "camelCase")]
    Sampled {
        grid: Vec<f64>,
        values: Vec<f64>,
        decay_exponent: f64,
    },
}

impl Spectrum {
    pub fn gaussian() -> Self {
        Spectrum::Gaussian { amplitude: 1.0, width: 1.0, cutoff: None }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Spectrum::Gaussian { amplitude, width, cutoff } => {
                if !(*amplitude >= 0.0) || !(*width > 0.0) || cutoff.is_some_and(|c| !(c >= 0.0)) {
                    return Err(Error::Domain("gaussian spectrum needs amplitude >= 0, width > 0".into()));
                }
            }
            Spectrum::Sampled { grid, values, decay_exponent } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::Domain("sampled spectrum needs >= 2 matching samples".into()));
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("sample grid must be strictly increasing".into()));
                }
                if values.iter().any(|v| !(*v >= 0.0)) || !(*decay_exponent > 0.0) {
                    return Err(Error::Domain("sample values must be >= 0 and decay > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Spectrum::Gaussian { amplitude, width, cutoff } => {
                if cutoff.is_some_and(|c| x.abs() > c) {
                    0.0
                } else {
                    let u = x / width;
                    amplitude * (-u * u).exp()
                }
            }
            Spectrum::Sampled { grid, values, decay_exponent } => {
                let (lo, hi) = (grid[0], grid[grid.len() - 1]);
                if x < lo {
                    values[0] * (-decay_exponent * (x.abs() - lo.abs()).max(0.0)).exp()
                } else if x > hi {
                    values[values.len() - 1] * (-decay_exponent * (x.abs() - hi.abs()).max(0.0)).exp()
                } else {
                    let i = grid.partition_point(|g| *g <= x).clamp(1, grid.len() - 1);
                    let (x0, x1) = (grid[i - 1], grid[i]);
                    let f = (x - x0) / (x1 - x0);
                    values[i - 1] * (1.0 - f) + values[i] * f
                }
            }
        }
    }

    /// Radius beyond which the spectrum is negligible (below about 1e-16 of
    /// its scale) or identically zero.
    pub fn support_radius(&self) -> f64 {
        match self {
            Spectrum::Gaussian { width, cutoff, .. } => match cutoff {
                Some(c) => *c,
                None => 6.1 * width,
            },
            Spectrum::Sampled { grid, decay_exponent, .. } => {
                let edge = grid[0].abs().max(grid[grid.len() - 1].abs());
                edge + 37.0 / decay_exponent
            }
        }
    }

    /// Largest numerator `j` with `j/L` inside the support radius.
    pub fn window(&self, l: i64) -> i64 {
        (self.support_radius() * l as f64 + 1e-9).floor() as i64
    }
}

/// Physical parameters of the lattice problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(rename = "L")]
    pub l: i64,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t_big: f64,
    pub sigma: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl PhysicalParams {
    pub fn new(l: i64, alpha: f64, t_big: f64, sigma: f64) -> Self {
        PhysicalParams { l, alpha, t_big, sigma, gamma: None }
    }

    /// Parameters on the scaling law `alpha = L^-gamma`.
    pub fn with_gamma(l: i64, gamma: f64, t_big: f64, sigma: f64) -> Self {
        PhysicalParams { l, alpha: (l as f64).powf(-gamma), t_big, sigma, gamma: Some(gamma) }
    }

    pub fn tkin(&self) -> f64 {
        self.alpha.powi(-2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::Domain("L must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma <= 2.0) || self.sigma == 1.0 {
            return Err(Error::Domain(format!("sigma {} outside (0,2] minus {{1}}", self.sigma)));
        }
        if !(self.t_big > 0.0) || !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Domain("need T > 0 and alpha >= 0".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::Domain("gamma must lie in (0,1]".into()));
            }
        }
        Ok(())
    }
}
