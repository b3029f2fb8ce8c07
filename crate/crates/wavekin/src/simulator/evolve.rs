use num_complex::Complex64;
use serde::Serialize;

use super::rhs::Nonlinearity;
use super::state::ModeState;
use crate::error::{Error, Result};

/// Largest `dt * 2 pi T max|Omega|` accepted by [`evolve`].
pub const PHASE_STEP_LIMIT: f64 = 1.0;

/// Relative mass drift that aborts an evolution.
pub const MASS_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Trajectory {
    pub states: Vec<ModeState>,
    pub steps: usize,
    /// Largest `|M(t) / M(0) - 1|` seen.
    pub mass_drift: f64,
}

/// Largest step the phase limit allows.
pub fn max_step(nl: &Nonlinearity) -> f64 {
    let rate = std::f64::consts::TAU * nl.params.t_big * nl.max_resonance();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        PHASE_STEP_LIMIT / rate
    }
}

/// Reusable RK4 buffers.
pub struct Stepper<'a> {
    nl: &'a Nonlinearity,
    buf: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(nl: &'a Nonlinearity) -> Self {
        let n = (2 * nl.cutoff + 1) as usize;
        let z = vec![Complex64::new(0.0, 0.0); n];
        Stepper { nl, buf: Vec::new(), k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }

    pub fn step(&mut self, a: &mut [Complex64], t: f64, h: f64) {
        let n = a.len();
        let [k1, k2, k3, k4] = &mut self.k;
        self.nl.rhs_fft(a, t, &mut self.buf, k1);
        for i in 0..n {
            self.tmp[i] = a[i] + k1[i] * (h / 2.0);
        }
        self.nl.rhs_fft(&self.tmp, t + h / 2.0, &mut self.buf, k2);
        for i in 0..n {
            self.tmp[i] = a[i] + k2[i] * (h / 2.0);
        }
        self.nl.rhs_fft(&self.tmp, t + h / 2.0, &mut self.buf, k3);
        for i in 0..n {
            self.tmp[i] = a[i] + k3[i] * h;
        }
        self.nl.rhs_fft(&self.tmp, t + h, &mut self.buf, k4);
        for i in 0..n {
            a[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Integrate from `s0` through the increasing rescaled times `times`
/// (each in `[s0.t, 1]`), recording one state per entry.
///
/// Steps never exceed `dt`; a `dt` above the phase limit is rejected.
pub fn evolve(s0: &ModeState, times: &[f64], dt: f64, nl: &Nonlinearity) -> Result<Trajectory> {
    if s0.cutoff != nl.cutoff || s0.l != nl.params.l {
        return Err(Error::Usage("state and nonlinearity disagree on L or cutoff".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain("dt must be positive".into()));
    }
    let limit = max_step(nl);
    if dt > limit {
        return Err(Error::Domain(format!("dt = {dt:.3e} exceeds the phase-resolution limit {limit:.3e}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| t < s0.t || t > 1.0) {
        return Err(Error::Domain("record times must increase within [t0, 1]".into()));
    }
    let m0 = s0.mass();
    let mut a = s0.a.clone();
    let mut t = s0.t;
    let mut steps = 0;
    let mut drift = 0.0f64;
    let mut st = Stepper::new(nl);
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        let n = (span / dt).ceil() as usize;
        let h = if n > 0 { span / n as f64 } else { 0.0 };
        for i in 0..n {
            st.step(&mut a, t + i as f64 * h, h);
        }
        steps += n;
        t = target;
        let state = ModeState { l: s0.l, cutoff: s0.cutoff, t, a: a.clone() };
        if m0 > 0.0 {
            drift = drift.max((state.mass() / m0 - 1.0).abs());
        }
        if !drift.is_finite() || drift > MASS_TOLERANCE {
            return Err(Error::Numeric { message: format!("mass drift at t = {t}"), residual: drift });
        }
        states.push(state);
    }
    Ok(Trajectory { states, steps, mass_drift: drift })
}

/// First Picard increment `b(t) = int_{t0}^t rhs(a0, s) ds` at each record
/// time, on the step grid [`evolve`] uses (Simpson per step, which is what
/// RK4 reduces to for a right side independent of the state).
///
/// `2 Re(conj(a0_k) b_k)` has mean exactly zero under Wick ordering for any
/// phase-invariant initial law, so it serves as a control variate for the
/// change in `|a_k|^2`.
pub fn first_increment(s0: &ModeState, times: &[f64], dt: f64, nl: &Nonlinearity) -> Vec<Vec<Complex64>> {
    let n = s0.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut buf = Vec::new();
    let (mut f0, mut fm, mut f1) = (vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut b = vec![zero; n];
    let mut t = s0.t;
    let mut out = Vec::with_capacity(times.len());
    nl.rhs_fft(&s0.a, t, &mut buf, &mut f0);
    for &target in times {
        let span = target - t;
        let steps = (span / dt).ceil() as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for i in 0..steps {
            let ti = t + i as f64 * h;
            nl.rhs_fft(&s0.a, ti + h / 2.0, &mut buf, &mut fm);
            nl.rhs_fft(&s0.a, ti + h, &mut buf, &mut f1);
            for m in 0..n {
                b[m] += (f0[m] + fm[m] * 4.0 + f1[m]) * (h / 6.0);
            }
            std::mem::swap(&mut f0, &mut f1);
        }
        t = target;
        out.push(b.clone());
    }
    out
}
