//! Exact solution counts for joint lattice counting problems.
//!
//! Every tuple fixes one of its variables through its linear constraint, so
//! only the remaining ones are enumerated. Variables that appear in a single
//! tuple are enumerated per tuple once the shared ones are fixed, which turns
//! the joint count into a sum of products.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::combinatorics::Sign;
use crate::error::{Error, Result};

/// Largest number of candidate evaluations a single count may perform.
pub const MAX_SEARCH_POINTS: u64 = 1_000_000_000;

/// One tuple `(j_1^e_1, ..., j_r^e_r)` with its own `k` (as a numerator over
/// `L`) and `beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingTuple {
    pub terms: Vec<(usize, Sign)>,
    pub k: i64,
    pub beta: f64,
}

impl CountingTuple {
    /// Parse `"1+,2-,3+"`.
    pub fn parse(spec: &str, k: i64, beta: f64) -> Result<Self> {
        let mut terms = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (j, s) = part.split_at(part.len() - 1);
            let sign = match s {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                _ => return Err(Error::Usage(format!("tuple entry `{part}` needs a trailing + or -"))),
            };
            let j: usize = j.parse().map_err(|_| Error::Usage(format!("tuple entry `{part}`")))?;
            terms.push((j, sign));
        }
        let t = CountingTuple { terms, k, beta };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if self.terms.is_empty() || self.terms.len() > 3 {
            return Err(Error::Domain(format!("tuples have 1 to 3 entries, got {}", self.terms.len())));
        }
        let distinct: BTreeSet<usize> = self.terms.iter().map(|t| t.0).collect();
        if distinct.len() != self.terms.len() {
            return Err(Error::Domain("repeated index in a tuple".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(j, s)| format!("{j}{}", s.symbol())).collect();
        format!("({})", parts.join(","))
    }
}

/// Which size restriction on `{k, a_j}` a problem must satisfy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SizeRule {
    /// At most two of `|k|, |a_j|` are `>= D`, per tuple.
    #[default]
    AtMostTwoLarge,
    /// At least two of `|k|, |a_j|` are `<= D`, per tuple.
    AtLeastTwoSmall,
    Unchecked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountingProblem {
    #[serde(rename = "L")]
    pub l: i64,
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// Box centre `a_j` per index.
    pub centers: BTreeMap<usize, f64>,
    pub tuples: Vec<CountingTuple>,
    #[serde(default)]
    pub size_rule: SizeRule,
}

impl CountingProblem {
    pub fn single(tuple: CountingTuple, centers: &[f64], l: i64, t: f64, sigma: f64, d: f64) -> Result<Self> {
        if centers.len() != tuple.terms.len() {
            return Err(Error::Usage(format!("{} centres for {} entries", centers.len(), tuple.terms.len())));
        }
        let centers = tuple.terms.iter().map(|x| x.0).zip(centers.iter().copied()).collect();
        Ok(CountingProblem { l, t, sigma, d, centers, tuples: vec![tuple], size_rule: SizeRule::default() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 || !(self.t > 0.0) || !(self.sigma > 0.0 && self.sigma <= 2.0) || !(self.d > 0.0) {
            return Err(Error::Domain("need L >= 1, T > 0, 0 < sigma <= 2, D > 0".into()));
        }
        if self.tuples.is_empty() {
            return Err(Error::Domain("no tuples".into()));
        }
        for t in &self.tuples {
            t.validate()?;
            for (j, _) in &t.terms {
                match self.centers.get(j) {
                    Some(a) if a.is_finite() => {}
                    _ => return Err(Error::Domain(format!("index {j} has no finite centre"))),
                }
            }
            let k = t.k as f64 / self.l as f64;
            let sizes: Vec<f64> =
                std::iter::once(k.abs()).chain(t.terms.iter().map(|(j, _)| self.centers[j].abs())).collect();
            let ok = match self.size_rule {
                SizeRule::AtMostTwoLarge => sizes.iter().filter(|&&x| x >= self.d).count() <= 2,
                SizeRule::AtLeastTwoSmall => sizes.iter().filter(|&&x| x <= self.d).count() >= 2,
                SizeRule::Unchecked => true,
            };
            if !ok {
                return Err(Error::Domain(format!("size restriction {:?} fails for {}", self.size_rule, t.label())));
            }
        }
        Ok(())
    }

    /// Lattice numerators allowed for index `j`: `|k_j - a_j| <= 1`.
    pub fn range(&self, j: usize) -> (i64, i64) {
        let a = self.centers[&j];
        let l = self.l as f64;
        ((l * (a - 1.0)).ceil() as i64, (l * (a + 1.0)).floor() as i64)
    }

    /// Number of distinct indices.
    pub fn vector_count(&self) -> usize {
        self.tuples.iter().flat_map(|t| t.terms.iter().map(|x| x.0)).collect::<BTreeSet<_>>().len()
    }

    /// Whether the numerators given by `value` solve tuple `t`.
    pub fn solves(&self, t: &CountingTuple, value: impl Fn(usize) -> i64) -> bool {
        let lin: i64 = t.terms.iter().map(|&(j, s)| s.value() * value(j)).sum();
        if lin != t.k {
            return false;
        }
        t.terms.iter().all(|&(j, _)| {
            let (lo, hi) = self.range(j);
            (lo..=hi).contains(&value(j))
        }) && self.window(t, |j| value(j))
    }

    fn window(&self, t: &CountingTuple, value: impl Fn(usize) -> i64) -> bool {
        let l = self.l as f64;
        if self.sigma == 2.0 {
            let s: i128 = t.terms.iter().map(|&(j, e)| e.value() as i128 * (value(j) as i128).pow(2)).sum();
            (s as f64 - t.beta * l * l).abs() <= l * l / self.t
        } else {
            let s: f64 = t.terms.iter().map(|&(j, e)| e.value() as f64 * (value(j).abs() as f64 / l).powf(self.sigma)).sum();
            (s - t.beta).abs() <= 1.0 / self.t
        }
    }
}

struct Plan {
    shared: Vec<usize>,
    /// Per tuple: enumerated private indices, then the determined one.
    free: Vec<Vec<usize>>,
    determined: Vec<Option<usize>>,
}

fn plan(p: &CountingProblem) -> Plan {
    let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
    for t in &p.tuples {
        for (j, _) in &t.terms {
            *uses.entry(*j).or_default() += 1;
        }
    }
    let shared: Vec<usize> = uses.iter().filter(|(_, &c)| c > 1).map(|(&j, _)| j).collect();
    let mut free = Vec::new();
    let mut determined = Vec::new();
    for t in &p.tuples {
        let mut private: Vec<usize> = t.terms.iter().map(|x| x.0).filter(|j| uses[j] == 1).collect();
        let last = private.pop();
        free.push(private);
        determined.push(last);
    }
    Plan { shared, free, determined }
}

/// Candidate evaluations [`count_solutions`] would perform.
pub fn search_cost(p: &CountingProblem) -> u64 {
    let pl = plan(p);
    let width = |j: usize| {
        let (lo, hi) = p.range(j);
        (hi - lo + 1).max(0) as u64
    };
    let outer = pl.shared.iter().try_fold(1u64, |a, &j| a.checked_mul(width(j))).unwrap_or(u64::MAX);
    let inner = pl
        .free
        .iter()
        .map(|f| f.iter().try_fold(1u64, |a, &j| a.checked_mul(width(j))).unwrap_or(u64::MAX))
        .fold(0u64, |a, b| a.saturating_add(b));
    outer.saturating_mul(inner.max(1))
}

/// Exact number of solutions of the joint problem.
pub fn count_solutions(p: &CountingProblem) -> Result<u64> {
    p.validate()?;
    let cost = search_cost(p);
    if cost > MAX_SEARCH_POINTS {
        return Err(Error::Resource(format!("{cost} candidate points exceed {MAX_SEARCH_POINTS}")));
    }
    let pl = plan(p);
    let top = p.centers.keys().max().copied().unwrap_or(0);
    let mut vals = vec![0i64; top + 1];
    let mut total = 0u64;
    outer(p, &pl, 0, &mut vals, &mut total);
    Ok(total)
}

fn outer(p: &CountingProblem, pl: &Plan, i: usize, vals: &mut [i64], total: &mut u64) {
    if i == pl.shared.len() {
        let mut prod = 1u64;
        for (ti, t) in p.tuples.iter().enumerate() {
            let c = tuple_count(p, t, &pl.free[ti], pl.determined[ti], 0, vals);
            prod *= c;
            if prod == 0 {
                return;
            }
        }
        *total += prod;
        return;
    }
    let j = pl.shared[i];
    let (lo, hi) = p.range(j);
    for v in lo..=hi {
        vals[j] = v;
        outer(p, pl, i + 1, vals, total);
    }
}

fn tuple_count(
    p: &CountingProblem,
    t: &CountingTuple,
    free: &[usize],
    last: Option<usize>,
    i: usize,
    vals: &mut [i64],
) -> u64 {
    if i == free.len() {
        let Some(d) = last else {
            return u64::from(p.solves(t, |j| vals[j]));
        };
        let (_, e) = *t.terms.iter().find(|x| x.0 == d).expect("determined index is in the tuple");
        let rest: i64 = t.terms.iter().filter(|x| x.0 != d).map(|&(j, s)| s.value() * vals[j]).sum();
        let v = e.value() * (t.k - rest);
        let (lo, hi) = p.range(d);
        if !(lo..=hi).contains(&v) {
            return 0;
        }
        vals[d] = v;
        return u64::from(p.window(t, |j| vals[j]));
    }
    let j = free[i];
    let (lo, hi) = p.range(j);
    let mut c = 0;
    for v in lo..=hi {
        vals[j] = v;
        c += tuple_count(p, t, free, last, i + 1, vals);
    }
    c
}
