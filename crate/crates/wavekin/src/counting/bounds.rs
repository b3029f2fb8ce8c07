//! Empirical check of the two- and three-vector counting bounds on a fixed
//! parameter grid.
//!
//! Constants are fitted on the smallest lattices and then frozen: every
//! larger lattice must stay below `slack * c_fit * bound`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::oracle::{count_solutions, CountingProblem, CountingTuple, SizeRule};
use crate::combinatorics::Sign;
use crate::error::{Error, Result};
use crate::lattice::omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundFamily {
    /// `(1,2)` with either sign: `C <= c L`.
    TwoVector,
    /// `(1+,2+)` with one centre `<= D`: `C <= c L T^{-1/2} D`.
    UniDirectional,
    /// `(1+,2-)` (and `(1+,2+)` off `sigma = 2`) with `h = min(1,|k|) >= 1/T`:
    /// `C <= c L T^{-1} h^{-1} D^{2-sigma}`.
    LargeGap,
    /// `(1+,2-,3+)`: `C <= c L^2 T^{-1} log L D^{2-sigma}`.
    ThreeVector,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 4] =
        [BoundFamily::TwoVector, BoundFamily::UniDirectional, BoundFamily::LargeGap, BoundFamily::ThreeVector];

    pub fn name(self) -> &'static str {
        match self {
            BoundFamily::TwoVector => "twoVector",
            BoundFamily::UniDirectional => "uniDirectional",
            BoundFamily::LargeGap => "largeGap",
            BoundFamily::ThreeVector => "threeVector",
        }
    }

    /// Bound without its constant; `h` only matters for the large gap.
    pub fn bound(self, l: i64, t: f64, sigma: f64, d: f64, h: f64) -> f64 {
        let l = l as f64;
        match self {
            BoundFamily::TwoVector => l,
            BoundFamily::UniDirectional => l * t.powf(-0.5) * d,
            BoundFamily::LargeGap => l / (t * h) * d.powf(2.0 - sigma),
            BoundFamily::ThreeVector => l * l / t * l.ln() * d.powf(2.0 - sigma),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VcGrid {
    #[serde(rename = "Ls")]
    pub ls: Vec<i64>,
    #[serde(rename = "Ts")]
    pub ts: Vec<f64>,
    pub sigmas: Vec<f64>,
    #[serde(rename = "Ds")]
    pub ds: Vec<f64>,
    /// Lattices up to this size fit the constants.
    pub calibration_max_l: i64,
    pub slack: f64,
    /// `T <= L / margin` off `sigma = 2`, and `T <= L^{1/(2-sigma)} / margin`
    /// for `sigma < 1`.
    pub regime_margin: f64,
}

impl Default for VcGrid {
    fn default() -> Self {
        VcGrid {
            ls: vec![8, 16, 32, 64],
            ts: vec![2.0, 4.0, 8.0, 16.0],
            sigmas: vec![0.5, 1.5, 2.0],
            ds: vec![1.0, 2.0, 4.0],
            calibration_max_l: 16,
            slack: 1.5,
            regime_margin: 2.0,
        }
    }
}

impl VcGrid {
    pub fn in_regime(&self, l: i64, t: f64, sigma: f64) -> bool {
        let l = l as f64;
        let within = |cap: f64| t <= cap / self.regime_margin * (1.0 + 1e-9);
        (sigma == 2.0 || within(l)) && (sigma >= 1.0 || within(l.powf(1.0 / (2.0 - sigma))))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VcRow {
    pub problem_id: String,
    pub family: BoundFamily,
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub k: f64,
    pub beta: f64,
    pub count: u64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilySummary {
    pub family: BoundFamily,
    pub points: usize,
    /// Largest ratio on the calibration lattices.
    pub fitted_constant: f64,
    pub threshold: f64,
    pub max_ratio_by_l: BTreeMap<i64, f64>,
    /// Max ratio at `2L` over max ratio at `L`.
    pub doubling_factors: Vec<f64>,
    /// Some doubling factor exceeds 1.5.
    pub growth_flag: bool,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VcReport {
    pub grid: VcGrid,
    pub skipped_outside_regime: usize,
    pub families: Vec<FamilySummary>,
    /// The two-vector constant moves by at most 20% per doubling.
    pub two_vector_stable: bool,
    pub pass: bool,
    #[serde(skip)]
    pub rows: Vec<VcRow>,
}

impl VcReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("problemId,family,L,T,sigma,D,k,beta,count,bound,ratio\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.6e},{:.6e}\n",
                r.problem_id,
                r.family.name(),
                r.l,
                r.t,
                r.sigma,
                r.d,
                r.k,
                r.beta,
                r.count,
                r.bound,
                r.ratio
            ));
        }
        out
    }
}

struct Instance {
    family: BoundFamily,
    problem: CountingProblem,
    h: f64,
}

fn tuple2(sign2: Sign, k: i64, beta: f64) -> CountingTuple {
    CountingTuple { terms: vec![(1, Sign::Plus), (2, sign2)], k, beta }
}

fn round_to(l: i64, x: f64) -> i64 {
    (x * l as f64).round() as i64
}

/// Phase values at a few lattice points of the box; used as `beta`.
fn betas(p: &CountingProblem, picks: &[Vec<f64>]) -> Vec<f64> {
    let t = &p.tuples[0];
    let l = p.l;
    let mut out: Vec<f64> = Vec::new();
    for pick in picks {
        // all but the last entry are chosen, the last follows from k
        let mut nums: Vec<i64> = pick.iter().map(|&x| round_to(l, x)).collect();
        let rest: i64 = t.terms[..nums.len()].iter().zip(&nums).map(|(&(_, s), &v)| s.value() * v).sum();
        let (_, last_sign) = *t.terms.last().expect("nonempty");
        nums.push(last_sign.value() * (t.k - rest));
        let phase: f64 = t
            .terms
            .iter()
            .zip(&nums)
            .map(|(&(_, s), &v)| s.value() as f64 * omega(v as f64 / l as f64, p.sigma))
            .sum();
        if !out.iter().any(|b| (b - phase).abs() < 1e-12) {
            out.push(phase);
        }
    }
    out
}

fn two_vector_instances(l: i64, t: f64, sigma: f64, d: f64) -> Vec<Instance> {
    let mut out = Vec::new();
    for sign2 in [Sign::Minus, Sign::Plus] {
        for a1 in [0.0, d / 2.0] {
            for a2 in [a1, a1 + 0.5, 3.0 * d] {
                for delta in [0.0, 0.25, 0.5] {
                    let kc = a1 + sign2.value() as f64 * a2 + delta;
                    let k = round_to(l, kc);
                    let kv = k as f64 / l as f64;
                    let base = CountingProblem {
                        l,
                        t,
                        sigma,
                        d,
                        centers: [(1, a1), (2, a2)].into(),
                        tuples: vec![tuple2(sign2, k, 0.0)],
                        size_rule: SizeRule::AtMostTwoLarge,
                    };
                    if base.validate().is_err() {
                        continue;
                    }
                    let picks = vec![vec![a1], vec![a1 - 0.5], vec![a1 + 0.5], vec![kv / 2.0], vec![0.0]];
                    let h = kv.abs().min(1.0);
                    for beta in betas(&base, &picks) {
                        let mut p = base.clone();
                        p.tuples[0].beta = beta;
                        let far = a2 > d;
                        if !far {
                            out.push(Instance { family: BoundFamily::TwoVector, problem: p.clone(), h });
                        }
                        if sign2 == Sign::Plus {
                            out.push(Instance { family: BoundFamily::UniDirectional, problem: p.clone(), h });
                        }
                        let gap_ok = h >= 1.0 / t && (sign2 == Sign::Minus || sigma != 2.0);
                        if gap_ok {
                            out.push(Instance { family: BoundFamily::LargeGap, problem: p, h });
                        }
                    }
                }
            }
        }
    }
    out
}

fn three_vector_instances(l: i64, t: f64, sigma: f64, d: f64) -> Vec<Instance> {
    let mut out = Vec::new();
    let terms = vec![(1, Sign::Plus), (2, Sign::Minus), (3, Sign::Plus)];
    for a1 in [0.0, d / 2.0] {
        for kc in [0.0, 0.5] {
            let a3 = 0.0;
            for a2 in [a1 + a3 - kc, a1 + a3 - kc + 0.5] {
                let k = round_to(l, kc);
                let base = CountingProblem {
                    l,
                    t,
                    sigma,
                    d,
                    centers: [(1, a1), (2, a2), (3, a3)].into(),
                    tuples: vec![CountingTuple { terms: terms.clone(), k, beta: 0.0 }],
                    size_rule: SizeRule::AtLeastTwoSmall,
                };
                if base.validate().is_err() {
                    continue;
                }
                // (k1, k3) picks; k2 follows
                let picks = vec![vec![a1, a3 + 0.5], vec![a1 + 0.5, a3 + 0.5], vec![a1 - 0.5, a3 + 0.25]];
                let mut bs = betas3(&base, &picks);
                bs.push(0.0);
                bs.dedup();
                for beta in bs {
                    let mut p = base.clone();
                    p.tuples[0].beta = beta;
                    out.push(Instance { family: BoundFamily::ThreeVector, problem: p, h: 1.0 });
                }
            }
        }
    }
    out
}

fn betas3(p: &CountingProblem, picks: &[Vec<f64>]) -> Vec<f64> {
    let l = p.l;
    let k = p.tuples[0].k;
    picks
        .iter()
        .map(|pk| {
            let (n1, n3) = (round_to(l, pk[0]), round_to(l, pk[1]));
            let n2 = n1 + n3 - k;
            let w = |n: i64| omega(n as f64 / l as f64, p.sigma);
            w(n1) - w(n2) + w(n3) - w(k)
        })
        .collect()
}

/// Count every grid instance and compare with the four bound families.
pub fn verify_vc_bounds(grid: &VcGrid) -> Result<VcReport> {
    if grid.ls.is_empty() || grid.ls.iter().all(|&l| l > grid.calibration_max_l) {
        return Err(Error::Usage("the grid needs at least one calibration lattice".into()));
    }
    let mut instances = Vec::new();
    let mut skipped = 0;
    for &l in &grid.ls {
        for &t in &grid.ts {
            for &sigma in &grid.sigmas {
                if !grid.in_regime(l, t, sigma) {
                    skipped += grid.ds.len();
                    continue;
                }
                for &d in &grid.ds {
                    instances.extend(two_vector_instances(l, t, sigma, d));
                    instances.extend(three_vector_instances(l, t, sigma, d));
                }
            }
        }
    }
    let rows: Vec<VcRow> = instances
        .par_iter()
        .enumerate()
        .map(|(i, ins)| {
            let p = &ins.problem;
            let count = count_solutions(p)?;
            let bound = ins.family.bound(p.l, p.t, p.sigma, p.d, ins.h);
            Ok(VcRow {
                problem_id: format!("{}-{i}{}", ins.family.name(), p.tuples[0].label()),
                family: ins.family,
                l: p.l,
                t: p.t,
                sigma: p.sigma,
                d: p.d,
                k: p.tuples[0].k as f64 / p.l as f64,
                beta: p.tuples[0].beta,
                count,
                bound,
                ratio: count as f64 / bound,
            })
        })
        .collect::<Result<_>>()?;
    let mut families = Vec::new();
    let mut two_vector_stable = true;
    for fam in BoundFamily::ALL {
        let mine: Vec<&VcRow> = rows.iter().filter(|r| r.family == fam).collect();
        let fitted = mine.iter().filter(|r| r.l <= grid.calibration_max_l).map(|r| r.ratio).fold(0.0, f64::max);
        let threshold = grid.slack * fitted;
        let mut by_l: BTreeMap<i64, f64> = BTreeMap::new();
        for r in &mine {
            let e = by_l.entry(r.l).or_insert(0.0);
            *e = e.max(r.ratio);
        }
        let maxes: Vec<f64> = by_l.values().copied().collect();
        let doubling: Vec<f64> = maxes.windows(2).map(|w| w[1] / w[0]).collect();
        if fam == BoundFamily::TwoVector {
            two_vector_stable = doubling.iter().all(|&f| (1.0 / 1.2..=1.2).contains(&f));
        }
        families.push(FamilySummary {
            family: fam,
            points: mine.len(),
            fitted_constant: fitted,
            threshold,
            max_ratio_by_l: by_l,
            growth_flag: doubling.iter().any(|&f| f > 1.5),
            doubling_factors: doubling,
            violations: mine.iter().filter(|r| r.ratio > threshold).count(),
        });
    }
    let pass = two_vector_stable && families.iter().all(|f| f.violations == 0 && f.points > 0);
    Ok(VcReport { grid: grid.clone(), skipped_outside_regime: skipped, families, two_vector_stable, pass, rows })
}
