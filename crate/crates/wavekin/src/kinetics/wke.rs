//! Explicit RK4 stepping of `dn/dt = K(n)` on a fixed grid.

use serde::Serialize;

use super::kernel::{kernel_grid, kernel_is_trivial, KernelSpec};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WkeConfig {
    pub grid: Vec<f64>,
    pub sigma: f64,
    /// Exponential decay rate used outside the grid.
    pub tail_decay: f64,
    /// Values below `-negative_tol * max n` count as a sign violation.
    pub negative_tol: f64,
    pub max_halvings: usize,
    pub kernel: KernelSpec,
}

impl WkeConfig {
    pub fn new(grid: Vec<f64>, sigma: f64) -> Self {
        WkeConfig { grid, sigma, tail_decay: 10.0, negative_tol: 1e-9, max_halvings: 6, kernel: KernelSpec::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WkeTrajectory {
    pub grid: Vec<f64>,
    pub times: Vec<f64>,
    /// One spectrum per entry of `times`.
    pub values: Vec<Vec<f64>>,
    /// Step halvings forced by the sign monitor.
    pub halvings: usize,
    pub min_value: f64,
}

impl WkeTrajectory {
    pub fn last(&self) -> &[f64] {
        self.values.last().expect("trajectory holds the initial slice")
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("t,xi,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            for (x, n) in self.grid.iter().zip(v) {
                s.push_str(&format!("{t},{x},{n}\n"));
            }
        }
        s
    }
}

fn sampled(cfg: &WkeConfig, values: &[f64]) -> Spectrum {
    // interpolation may dip a hair below zero; the spectrum type does not
    let values = values.iter().map(|v| v.max(0.0)).collect();
    Spectrum::Sampled { grid: cfg.grid.clone(), values, decay_exponent: cfg.tail_decay }
}

fn rhs(cfg: &WkeConfig, values: &[f64]) -> Result<Vec<f64>> {
    if kernel_is_trivial(cfg.sigma) {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(kernel_grid(&sampled(cfg, values), &cfg.grid, cfg.sigma, &cfg.kernel)?.values)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(x, y)| x + a * y).collect()
}

fn rk4(cfg: &WkeConfig, n: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = rhs(cfg, n)?;
    let k2 = rhs(cfg, &axpy(n, dt / 2.0, &k1))?;
    let k3 = rhs(cfg, &axpy(n, dt / 2.0, &k2))?;
    let k4 = rhs(cfg, &axpy(n, dt, &k3))?;
    Ok((0..n.len()).map(|i| n[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Integrate from `n0` (sampled on the grid) to `t_end` in `steps` RK4
/// steps, recording every step.
pub fn integrate_wke(n0: &Spectrum, t_end: f64, steps: usize, cfg: &WkeConfig) -> Result<WkeTrajectory> {
    n0.validate()?;
    if cfg.grid.len() < 2 || cfg.grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("grid must hold >= 2 increasing points".into()));
    }
    if !(t_end >= 0.0) || steps == 0 {
        return Err(Error::Domain("need t_end >= 0 and at least one step".into()));
    }
    let mut n: Vec<f64> = cfg.grid.iter().map(|&x| n0.eval(x)).collect();
    let scale = n.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut traj =
        WkeTrajectory { grid: cfg.grid.clone(), times: vec![0.0], values: vec![n.clone()], halvings: 0, min_value: 0.0 };
    traj.min_value = n.iter().copied().fold(f64::INFINITY, f64::min);
    if t_end == 0.0 {
        return Ok(traj);
    }
    let dt = t_end / steps as f64;
    let mut t = 0.0;
    for step in 1..=steps {
        let target = if step == steps { t_end } else { step as f64 * dt };
        // sub-stepping after a sign violation, up to max_halvings times
        let mut sub = 0;
        let next = loop {
            let parts = 1usize << sub;
            let h = (target - t) / parts as f64;
            let mut m = n.clone();
            let mut ok = true;
            for _ in 0..parts {
                m = rk4(cfg, &m, h)?;
                if m.iter().any(|v| *v < -cfg.negative_tol * scale) {
                    ok = false;
                    break;
                }
            }
            if ok {
                break m;
            }
            sub += 1;
            traj.halvings += 1;
            if sub > cfg.max_halvings {
                let worst = m.iter().copied().fold(f64::INFINITY, f64::min);
                return Err(Error::Numeric {
                    message: format!("spectrum turned negative near t = {target} after {} halvings", cfg.max_halvings),
                    residual: worst,
                });
            }
        };
        n = next;
        t = target;
        traj.min_value = traj.min_value.min(n.iter().copied().fold(f64::INFINITY, f64::min));
        traj.times.push(t);
        traj.values.push(n.clone());
    }
    Ok(traj)
}
