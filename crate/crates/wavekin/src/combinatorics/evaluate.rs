//! Numerical evaluation of tree iterates and couple expressions.
//!
//! Time integrals over the ordered domain (a child fires before its parent,
//! roots before `t` or `s`) are computed by a recursion on the branching
//! nodes: `F_n(x) = ∫_0^x e^{i λ_n u} Π_c F_c(u) du`, discretized with
//! panel Gauss–Legendre and its spectral integration matrix.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::couple::Couple;
use super::decoration::{epsilon, for_each_couple_decoration, for_each_tree_decoration, LeafBounds};
use super::tree::{Diagram, NodeId, SignedTernaryTree};
use crate::error::{Error, Result};
use crate::lattice::{Dispersion, WaveNumber};
use crate::quad::SpectralRule;
use crate::spectrum::{PhysicalParams, Spectrum};

/// Largest diagram order evaluated numerically.
pub const MAX_EVAL_ORDER: usize = 3;

/// Resolution of the time-integral quadrature.
#[derive(Clone, Debug)]
pub struct QuadSpec {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Maximum phase (radians) swept by the fastest oscillation per panel.
    pub radians_per_panel: f64,
    /// Absolute tolerance for the panel-doubling check.
    pub tol: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { order: 16, radians_per_panel: 2.0, tol: 1e-10 }
    }
}

/// Nesting structure of the branching nodes of a diagram.
#[derive(Clone, Debug)]
pub struct TimeForest {
    /// Branching nodes in post-order (children before parents).
    pub post: Vec<NodeId>,
    /// For each entry of `post`, indices into `post` of branching children.
    pub kids: Vec<Vec<usize>>,
    /// Root entries (index into `post`) and their upper time bounds.
    pub roots: Vec<(usize, f64)>,
}

impl TimeForest {
    pub fn new<D: Diagram + ?Sized>(d: &D, roots: &[(NodeId, f64)]) -> Self {
        let mut post = Vec::new();
        for &(r, _) in roots {
            post.extend(d.postorder_branching_from(r));
        }
        let idx = |v: NodeId| post.iter().position(|&x| x == v);
        let kids = post
            .iter()
            .map(|&v| {
                d.node(v).children.expect("branching").iter().filter_map(|&c| idx(c)).collect()
            })
            .collect();
        let roots = roots.iter().filter_map(|&(r, b)| idx(r).map(|i| (i, b))).collect();
        TimeForest { post, kids, roots }
    }

    /// Product over root trees of `F_root(bound)`; trivial trees give 1.
    pub fn integrate(&self, lambdas: &[f64], rule: &SpectralRule, panel_scale: f64, rad: f64) -> Complex64 {
        if self.post.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let total: f64 = lambdas.iter().map(|l| l.abs()).sum();
        let mut bps: Vec<f64> = vec![0.0];
        bps.extend(self.roots.iter().map(|r| r.1));
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        // panel edges
        let mut edges = vec![0.0];
        for w in bps.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let p = ((len * total / rad).ceil().max(1.0) * panel_scale).ceil() as usize;
            for j in 1..=p {
                edges.push(w[0] + len * j as f64 / p as f64);
            }
            *edges.last_mut().expect("edge") = w[1];
        }
        let np = edges.len() - 1;
        let q = rule.nodes.len();
        if np == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let xs: Vec<f64> = (0..np)
            .flat_map(|p| {
                let (a, b) = (edges[p], edges[p + 1]);
                rule.nodes.iter().map(move |x| 0.5 * (a + b) + 0.5 * (b - a) * x)
            })
            .collect();
        let mut inner: Vec<Vec<Complex64>> = Vec::with_capacity(self.post.len());
        let mut ends: Vec<Vec<Complex64>> = Vec::with_capacity(self.post.len());
        let mut g = vec![Complex64::new(0.0, 0.0); q];
        for (i, kids) in self.kids.iter().enumerate() {
            let lam = lambdas[i];
            let mut vals = vec![Complex64::new(0.0, 0.0); np * q];
            let mut cum = vec![Complex64::new(0.0, 0.0); np + 1];
            for p in 0..np {
                let half = 0.5 * (edges[p + 1] - edges[p]);
                for j in 0..q {
                    let x = xs[p * q + j];
                    let mut v = Complex64::from_polar(1.0, lam * x);
                    for &c in kids {
                        v *= inner[c][p * q + j];
                    }
                    g[j] = v;
                }
                let base = cum[p];
                let mut tot = Complex64::new(0.0, 0.0);
                for j in 0..q {
                    tot += g[j] * rule.weights[j];
                }
                cum[p + 1] = base + tot * half;
                for ii in 0..q {
                    let row = &rule.integ[ii];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..q {
                        acc += g[j] * row[j];
                    }
                    vals[p * q + ii] = base + acc * half;
                }
            }
            inner.push(vals);
            ends.push(cum);
        }
        let mut out = Complex64::new(1.0, 0.0);
        for &(r, bound) in &self.roots {
            let e = edges.iter().position(|&x| x == bound).expect("bound is an edge");
            out *= ends[r][e];
        }
        out
    }
}

/// Integrator bundling the rule with the panel-doubling check.
pub struct TimeIntegrator {
    pub forest: TimeForest,
    rule: SpectralRule,
    spec: QuadSpec,
    worst: Option<(Vec<f64>, Complex64, f64)>,
}

impl TimeIntegrator {
    pub fn new(forest: TimeForest, spec: QuadSpec) -> Self {
        TimeIntegrator { rule: SpectralRule::new(spec.order), forest, spec, worst: None }
    }

    pub fn eval(&mut self, lambdas: &[f64]) -> Complex64 {
        let v = self.forest.integrate(lambdas, &self.rule, 1.0, self.spec.radians_per_panel);
        let total: f64 = lambdas.iter().map(|l| l.abs()).sum();
        if self.worst.as_ref().is_none_or(|w| total > w.2) {
            self.worst = Some((lambdas.to_vec(), v, total));
        }
        v
    }

    /// Re-evaluate the most oscillatory integrand with doubled panels.
    pub fn check(&self) -> Result<f64> {
        let Some((lam, v, _)) = &self.worst else { return Ok(0.0) };
        let v2 = self.forest.integrate(lam, &self.rule, 2.0, self.spec.radians_per_panel);
        let r = (v - v2).norm();
        if r > self.spec.tol {
            return Err(Error::Numeric { message: "time-simplex quadrature unresolved".into(), residual: r });
        }
        Ok(r)
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_EVAL_ORDER {
        return Err(Error::Resource(format!("order {n} exceeds numerical evaluation limit {MAX_EVAL_ORDER}")));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("time {t} outside [0,1]")));
    }
    Ok(())
}

/// Phase rates `2π ζ_n T Ω_n` for the forest's nodes and the product of
/// epsilon factors.
fn phases(
    d: &(impl Diagram + ?Sized),
    forest: &TimeForest,
    values: &[i64],
    disp: &Dispersion,
    t_big: f64,
    lam: &mut [f64],
) -> i64 {
    let mut eps = 1i64;
    for (i, &v) in forest.post.iter().enumerate() {
        let ch = d.node(v).children.expect("branching");
        let (k1, k2, k3) = (values[ch[0]], values[ch[1]], values[ch[2]]);
        let e = epsilon(k1, k2, k3) as i64;
        if e == 0 {
            return 0;
        }
        eps *= e;
        lam[i] = 2.0 * PI * d.sign(v).value() as f64 * t_big * disp.resonance(k1, k2, k3, values[v]);
    }
    eps
}

/// The couple expression `K_Q(t, s, k)`, summed over decorations with all
/// leaves inside the support window of `nin`.
pub fn evaluate_kq(
    c: &Couple,
    k: WaveNumber,
    t: f64,
    s: f64,
    p: &PhysicalParams,
    nin: &Spectrum,
    quad: &QuadSpec,
) -> Result<Complex64> {
    let window = nin.window(p.l).max(k.num.abs());
    evaluate_kq_windowed(c, k, t, s, p, nin, quad, window)
}

/// [`evaluate_kq`] with every leaf restricted to `[-window, window]`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_kq_windowed(
    c: &Couple,
    k: WaveNumber,
    t: f64,
    s: f64,
    p: &PhysicalParams,
    nin: &Spectrum,
    quad: &QuadSpec,
    window: i64,
) -> Result<Complex64> {
    let n = c.order();
    check_order(n)?;
    check_time(t)?;
    check_time(s)?;
    let l = p.l;
    if k.l != l {
        return Err(Error::Usage("wavenumber denominator differs from L".into()));
    }
    let disp = Dispersion::new(p.sigma, l);
    let [rp, rm] = c.roots();
    let forest = TimeForest::new(c, &[(rp, t), (rm, s)]);
    let mut integ = TimeIntegrator::new(forest.clone(), quad.clone());
    let pairs = c.pairs();
    let mut lam = vec![0.0; forest.post.len()];
    let mut sum = Complex64::new(0.0, 0.0);
    for_each_couple_decoration(c, k.num, l, &LeafBounds::window(window), |vals| {
        let eps = phases(c, &forest, vals, &disp, p.t_big, &mut lam);
        if eps == 0 {
            return;
        }
        let amp: f64 = pairs.iter().map(|&(a, _)| nin.eval(vals[a] as f64 / l as f64)).product();
        if amp == 0.0 {
            return;
        }
        sum += integ.eval(&lam) * (eps as f64 * amp);
    })?;
    integ.check()?;
    let pref = (p.alpha * p.t_big / l as f64).powi(n as i32);
    Ok(sum * c.zeta_factor() * pref)
}

/// Deterministic part of a tree iterate: one coefficient per decoration
/// and the leaf modes it multiplies.
#[derive(Clone, Debug)]
pub struct JSampler {
    pub window: i64,
    coef: Vec<Complex64>,
    /// Per decoration, leaf entries `(mode index, conjugate?)`.
    leaves: Vec<(usize, bool)>,
    stride: usize,
}

impl JSampler {
    /// Precompute `(αT/L)^n ζ(T) ε_D I_D(t) Π √n_in(k_ℓ)` for every decoration
    /// with leaves in `[-window, window]`.
    pub fn new(
        tree: &SignedTernaryTree,
        k: WaveNumber,
        t: f64,
        p: &PhysicalParams,
        nin: &Spectrum,
        window: i64,
        quad: &QuadSpec,
    ) -> Result<Self> {
        let n = tree.order();
        check_order(n)?;
        check_time(t)?;
        let l = p.l;
        let disp = Dispersion::new(p.sigma, l);
        let forest = TimeForest::new(tree, &[(tree.root(), t)]);
        let mut integ = TimeIntegrator::new(forest.clone(), quad.clone());
        let leaf_ids = tree.leaves();
        let pref = tree.zeta_factor() * (p.alpha * p.t_big / l as f64).powi(n as i32);
        let mut lam = vec![0.0; forest.post.len()];
        let mut coef = Vec::new();
        let mut leaves = Vec::new();
        for_each_tree_decoration(tree, k.num, window, |vals| {
            let eps = phases(tree, &forest, vals, &disp, p.t_big, &mut lam);
            if eps == 0 {
                return;
            }
            let amp: f64 = leaf_ids.iter().map(|&x| nin.eval(vals[x] as f64 / l as f64).sqrt()).product();
            if amp == 0.0 {
                return;
            }
            coef.push(pref * integ.eval(&lam) * (eps as f64 * amp));
            for &x in &leaf_ids {
                leaves.push(((vals[x] + window) as usize, tree.sign(x) == crate::combinatorics::Sign::Minus));
            }
        })?;
        integ.check()?;
        Ok(JSampler { window, coef, leaves, stride: leaf_ids.len() })
    }

    pub fn terms(&self) -> usize {
        self.coef.len()
    }

    /// Evaluate on given mode variables `g[j + window]`.
    pub fn eval(&self, g: &[Complex64]) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (d, c) in self.coef.iter().enumerate() {
            let mut v = *c;
            for &(m, conj) in &self.leaves[d * self.stride..(d + 1) * self.stride] {
                v *= if conj { g[m].conj() } else { g[m] };
            }
            out += v;
        }
        out
    }
}

/// Draw standard complex Gaussians (`E|g|^2 = 1`) for modes `-window..=window`.
pub fn draw_modes<R: Rng + ?Sized>(rng: &mut R, window: i64) -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..2 * window + 1)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

/// One realization of the tree iterate `(J_T)_k(t)`.
pub fn sample_j_iterate<R: Rng + ?Sized>(
    tree: &SignedTernaryTree,
    k: WaveNumber,
    t: f64,
    p: &PhysicalParams,
    nin: &Spectrum,
    rng: &mut R,
) -> Result<Complex64> {
    let window = nin.window(p.l).max(k.num.abs());
    let sampler = JSampler::new(tree, k, t, p, nin, window, &QuadSpec::default())?;
    let g = draw_modes(rng, window);
    Ok(sampler.eval(&g))
}
