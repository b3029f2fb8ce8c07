//! Right-hand side `d a_j / dt = i (alpha T / L) sum eps e(T t Omega)
//! a_1 conj(a_2) a_3` of the Wick-ordered interaction-picture system.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::Dispersion;
use crate::spectrum::PhysicalParams;

/// Smallest `2^a 3^b 5^c` that is at least `n`.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Both evaluation routes for one lattice, cutoff and parameter set.
pub struct Nonlinearity {
    pub params: PhysicalParams,
    pub cutoff: i64,
    /// FFT length; `>= 4 cutoff + 1`, so the cubic convolution restricted
    /// to retained modes is alias-free.
    pub fft_len: usize,
    disp: Dispersion,
    w: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Nonlinearity {
    pub fn new(params: PhysicalParams, cutoff: i64) -> Result<Self> {
        params.validate()?;
        if cutoff < 0 {
            return Err(Error::Domain("cutoff must be >= 0".into()));
        }
        let fft_len = smooth_size((4 * cutoff + 1) as usize);
        let mut planner = FftPlanner::new();
        let disp = Dispersion::new(params.sigma, params.l);
        let w = (-cutoff..=cutoff).map(|j| disp.w(j)).collect();
        Ok(Nonlinearity {
            params,
            cutoff,
            fft_len,
            disp,
            w,
            fwd: planner.plan_fft_forward(fft_len),
            inv: planner.plan_fft_inverse(fft_len),
        })
    }

    fn coupling(&self) -> f64 {
        self.params.alpha * self.params.t_big / self.params.l as f64
    }

    /// Largest `|Omega|` among retained modes.
    pub fn max_resonance(&self) -> f64 {
        2.0 * self.w.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Convolution route: the full cubic product of `v_j = a_j e(w_j T t)`
    /// by FFT, minus the Wick correction `2 (sum |v|^2) v_j`.
    pub fn rhs_fft(&self, a: &[Complex64], t: f64, buf: &mut Vec<Complex64>, out: &mut [Complex64]) {
        let c = self.cutoff;
        let m = self.fft_len;
        let tt = self.params.t_big * t;
        buf.clear();
        buf.resize(m, Complex64::new(0.0, 0.0));
        let mut mass = 0.0;
        for (i, j) in (-c..=c).enumerate() {
            let v = a[i] * Complex64::from_polar(1.0, TAU * self.w[i] * tt);
            mass += v.norm_sqr();
            buf[j.rem_euclid(m as i64) as usize] = v;
        }
        self.inv.process(buf);
        for z in buf.iter_mut() {
            *z *= z.norm_sqr();
        }
        self.fwd.process(buf);
        let g = Complex64::new(0.0, self.coupling());
        let scale = 1.0 / m as f64;
        for (i, j) in (-c..=c).enumerate() {
            let s = buf[j.rem_euclid(m as i64) as usize] * scale;
            let back = Complex64::from_polar(1.0, -TAU * self.w[i] * tt);
            out[i] = g * (s * back - 2.0 * mass * a[i]);
        }
    }

    /// Direct route: the epsilon-filtered triple sum.
    pub fn rhs_direct(&self, a: &[Complex64], t: f64) -> Vec<Complex64> {
        let c = self.cutoff;
        let at = |j: i64| a[(j + c) as usize];
        let tt = self.params.t_big * t;
        let g = Complex64::new(0.0, self.coupling());
        (-c..=c)
            .map(|j| {
                let mut s = Complex64::new(0.0, 0.0);
                for j1 in -c..=c {
                    for j3 in -c..=c {
                        let j2 = j1 + j3 - j;
                        if j2.abs() > c {
                            continue;
                        }
                        let eps = if j2 != j1 && j2 != j3 {
                            1.0
                        } else if j1 == j2 && j2 == j3 {
                            -1.0
                        } else {
                            continue;
                        };
                        let ph = Complex64::from_polar(1.0, TAU * tt * self.disp.resonance(j1, j2, j3, j));
                        s += ph * at(j1) * at(j2).conj() * at(j3) * eps;
                    }
                }
                g * s
            })
            .collect()
    }
}
