//! Monte-Carlo check of the pairing expansion for second moments of iterates.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::couple::enumerate_couples;
use super::evaluate::{draw_modes, evaluate_kq_windowed, JSampler, QuadSpec};
use super::tree::{enumerate_trees, Sign};
use crate::error::{Error, Result};
use crate::lattice::WaveNumber;
use crate::spectrum::{PhysicalParams, Spectrum};

#[derive(Clone, Debug)]
pub struct IsserlisConfig {
    pub t: f64,
    pub s: f64,
    pub samples: usize,
    pub seed: u64,
    /// Leaf window (numerator); defaults to the spectrum's support.
    pub window: Option<i64>,
    pub quad: QuadSpec,
}

impl Default for IsserlisConfig {
    fn default() -> Self {
        IsserlisConfig { t: 1.0, s: 1.0, samples: 10_000, seed: 1, window: None, quad: QuadSpec::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IsserlisReport {
    pub n1: usize,
    pub n2: usize,
    pub samples: usize,
    pub mc_mean: Complex64,
    pub mc_se: (f64, f64),
    pub predicted: Complex64,
    pub z_re: f64,
    pub z_im: f64,
    /// `max(|z_re|, |z_im|)`.
    pub z: f64,
}

fn z(diff: f64, se: f64) -> f64 {
    if se == 0.0 {
        if diff.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / se
    }
}

/// Accumulates real and imaginary moments of a complex sample.
#[derive(Clone, Debug, Default)]
struct Moments {
    n: usize,
    sum: Complex64,
    sq_re: f64,
    sq_im: f64,
}

impl Moments {
    fn push(&mut self, x: Complex64) {
        self.n += 1;
        self.sum += x;
        self.sq_re += x.re * x.re;
        self.sq_im += x.im * x.im;
    }

    fn mean_se(&self) -> (Complex64, f64, f64) {
        let n = self.n as f64;
        let m = self.sum / n;
        let var_re = ((self.sq_re / n - m.re * m.re) * n / (n - 1.0)).max(0.0);
        let var_im = ((self.sq_im / n - m.im * m.im) * n / (n - 1.0)).max(0.0);
        (m, (var_re / n).sqrt(), (var_im / n).sqrt())
    }
}

/// Compare `E[J_{n1}(t) conj(J_{n2}(s))]` (sum over all plus trees of each
/// order) with the sum of couple expressions over every pairing, for all
/// requested order pairs at once.
pub fn isserlis_check_many(
    orders: &[(usize, usize)],
    k: WaveNumber,
    p: &PhysicalParams,
    nin: &Spectrum,
    cfg: &IsserlisConfig,
) -> Result<Vec<IsserlisReport>> {
    if orders.iter().any(|&(a, b)| a + b > 2) {
        return Err(Error::Usage("isserlis check requires n1 + n2 <= 2".into()));
    }
    if cfg.samples < 2 {
        return Err(Error::Usage("need at least two samples".into()));
    }
    let window = cfg.window.unwrap_or_else(|| nin.window(p.l)).max(k.num.abs());
    let max_n = orders.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    let mut at_t: Vec<Vec<JSampler>> = Vec::new();
    let mut at_s: Vec<Vec<JSampler>> = Vec::new();
    for n in 0..=max_n {
        let trees = enumerate_trees(n, Sign::Plus)?;
        let mk = |time: f64| -> Result<Vec<JSampler>> {
            trees.iter().map(|tr| JSampler::new(tr, k, time, p, nin, window, &cfg.quad)).collect()
        };
        at_t.push(mk(cfg.t)?);
        at_s.push(if cfg.s == cfg.t { Vec::new() } else { mk(cfg.s)? });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut moments = vec![Moments::default(); orders.len()];
    let mut jt = vec![Complex64::new(0.0, 0.0); max_n + 1];
    let mut js = vec![Complex64::new(0.0, 0.0); max_n + 1];
    for _ in 0..cfg.samples {
        let g = draw_modes(&mut rng, window);
        for n in 0..=max_n {
            jt[n] = at_t[n].iter().map(|sm| sm.eval(&g)).sum();
            js[n] = if cfg.s == cfg.t { jt[n] } else { at_s[n].iter().map(|sm| sm.eval(&g)).sum() };
        }
        for (m, &(a, b)) in moments.iter_mut().zip(orders) {
            m.push(jt[a] * js[b].conj());
        }
    }
    let mut out = Vec::new();
    for (m, &(n1, n2)) in moments.iter().zip(orders) {
        let predicted = predicted_correlation(n1, n2, k, p, nin, cfg)?;
        let (mean, se_re, se_im) = m.mean_se();
        let z_re = z(mean.re - predicted.re, se_re);
        let z_im = z(mean.im - predicted.im, se_im);
        out.push(IsserlisReport {
            n1,
            n2,
            samples: cfg.samples,
            mc_mean: mean,
            mc_se: (se_re, se_im),
            predicted,
            z_re,
            z_im,
            z: z_re.abs().max(z_im.abs()),
        });
    }
    Ok(out)
}

/// Sum of couple expressions over couples with plus order `n1` and minus
/// order `n2`, using the leaf window of the Monte-Carlo side.
pub fn predicted_correlation(
    n1: usize,
    n2: usize,
    k: WaveNumber,
    p: &PhysicalParams,
    nin: &Spectrum,
    cfg: &IsserlisConfig,
) -> Result<Complex64> {
    let window = cfg.window.unwrap_or_else(|| nin.window(p.l)).max(k.num.abs());
    let mut total = Complex64::new(0.0, 0.0);
    for c in enumerate_couples(n1 + n2)? {
        if c.tree_orders() != (n1, n2) {
            continue;
        }
        total += evaluate_kq_windowed(&c, k, cfg.t, cfg.s, p, nin, &cfg.quad, window)?;
    }
    Ok(total)
}

/// Single-pair convenience wrapper.
pub fn isserlis_check(
    n1: usize,
    n2: usize,
    k: WaveNumber,
    p: &PhysicalParams,
    nin: &Spectrum,
    cfg: &IsserlisConfig,
) -> Result<IsserlisReport> {
    Ok(isserlis_check_many(&[(n1, n2)], k, p, nin, cfg)?.remove(0))
}
