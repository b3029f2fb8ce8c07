//! Lattice decorations of trees and couples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::couple::Couple;
use super::tree::{Diagram, NodeId, SignedTernaryTree};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::lattice::{Dispersion, WaveNumber};

/// Free-slot limit applied when `L > 16`.
pub const MAX_FREE_SLOTS_LARGE_L: usize = 5;

/// Wavenumber numerators (over `l`) indexed by node id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Decoration {
    #[serde(rename = "L")]
    pub l: i64,
    pub values: Vec<i64>,
}

impl Decoration {
    pub fn value(&self, v: NodeId) -> WaveNumber {
        WaveNumber::new(self.values[v], self.l)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "schemaVersion": SCHEMA_VERSION, "L": self.l, "values": self.values })
    }
}

/// Leaf constraints for enumeration: an optional symmetric window
/// `|k| <= window/L` on every leaf and unit boxes `|k - center| <= 1`.
#[derive(Clone, Debug, Default)]
pub struct LeafBounds {
    pub window: Option<i64>,
    pub boxes: BTreeMap<NodeId, f64>,
}

impl LeafBounds {
    pub fn window(w: i64) -> Self {
        LeafBounds { window: Some(w), boxes: BTreeMap::new() }
    }

    fn range(&self, leaves: &[NodeId], l: i64) -> Option<(i64, i64)> {
        let (mut lo, mut hi) = match self.window {
            Some(w) => (-w, w),
            None => (i64::MIN / 4, i64::MAX / 4),
        };
        for leaf in leaves {
            if let Some(&c) = self.boxes.get(leaf) {
                lo = lo.max(((c - 1.0) * l as f64 - 1e-9).ceil() as i64);
                hi = hi.min(((c + 1.0) * l as f64 + 1e-9).floor() as i64);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Fill internal values bottom-up from leaf values:
/// `zeta_n k_n = sum_j zeta_j k_j` over the three children.
pub fn fill_internal<D: Diagram + ?Sized>(d: &D, post: &[NodeId], values: &mut [i64]) {
    for &v in post {
        let ch = d.node(v).children.expect("branching");
        let s: i64 = ch.iter().map(|&c| d.sign(c).value() * values[c]).sum();
        values[v] = d.sign(v).value() * s;
    }
}

/// Exact check of conservation at every branching node and of pairing.
pub fn check_couple_decoration(c: &Couple, dec: &Decoration) -> Result<()> {
    if dec.values.len() != c.nodes().len() {
        return Err(Error::Contract("decoration size mismatch".into()));
    }
    for v in c.branching_nodes() {
        let ch = c.node(v).children.expect("branching");
        let s: i64 = ch.iter().map(|&x| c.sign(x).value() * dec.values[x]).sum();
        if s != c.sign(v).value() * dec.values[v] {
            return Err(Error::Contract(format!("conservation fails at node {v}")));
        }
    }
    for (a, b) in c.pairs() {
        if dec.values[a] != dec.values[b] {
            return Err(Error::Contract(format!("paired leaves {a},{b} differ")));
        }
    }
    let [rp, rm] = c.roots();
    if dec.values[rp] != dec.values[rm] {
        return Err(Error::Contract("roots carry different wavenumbers".into()));
    }
    Ok(())
}

/// Resonance factor and the epsilon coefficient at a branching node:
/// `epsilon = 1` if `k2` differs from `k1` and `k3`, `-1` if all three
/// children agree, `0` otherwise.
pub fn local_factors<D: Diagram + ?Sized>(d: &D, values: &[i64], l: i64, node: NodeId, sigma: f64) -> Result<(f64, i8)> {
    let ch = d.node(node).children.ok_or_else(|| Error::Usage(format!("node {node} is a leaf")))?;
    let (k1, k2, k3, k) = (values[ch[0]], values[ch[1]], values[ch[2]], values[node]);
    let omega = Dispersion::new(sigma, l).resonance(k1, k2, k3, k);
    Ok((omega, epsilon(k1, k2, k3)))
}

#[inline]
pub fn epsilon(k1: i64, k2: i64, k3: i64) -> i8 {
    if k2 != k1 && k2 != k3 {
        1
    } else if k1 == k2 && k2 == k3 {
        -1
    } else {
        0
    }
}

/// Enumeration plan for a couple: one pair is solved from the root
/// constraint, the others range over their boxes.
struct CouplePlan {
    pairs: Vec<(NodeId, NodeId)>,
    coef: Vec<i64>,
    determined: usize,
    ranges: Vec<(i64, i64)>,
    post: Vec<NodeId>,
}

fn couple_plan(c: &Couple, l: i64, bounds: &LeafBounds) -> Result<Option<CouplePlan>> {
    let pairs = c.pairs();
    let free = pairs.len() - 1;
    if l > 16 && free > MAX_FREE_SLOTS_LARGE_L {
        return Err(Error::Resource(format!("{free} free slots at L = {l} exceeds guard")));
    }
    // coefficient of each pair value in the plus-root sum
    let coef: Vec<i64> = pairs
        .iter()
        .map(|&(a, b)| {
            [a, b].iter().filter(|&&x| c.tree_of(x) == 0).map(|&x| c.sign(x).value()).sum()
        })
        .collect();
    let determined = coef
        .iter()
        .position(|&x| x != 0)
        .ok_or_else(|| Error::Contract("no pair crosses the two trees".into()))?;
    let mut ranges = Vec::with_capacity(pairs.len());
    for &(a, b) in &pairs {
        match bounds.range(&[a, b], l) {
            Some(r) => ranges.push(r),
            None => return Ok(None),
        }
    }
    if ranges.iter().any(|r| r.0 <= i64::MIN / 8 || r.1 >= i64::MAX / 8) && free > 0 {
        return Err(Error::Usage("unbounded leaf values: supply a window or boxes".into()));
    }
    let mut post = c.postorder_branching_from(c.roots()[0]);
    post.extend(c.postorder_branching_from(c.roots()[1]));
    Ok(Some(CouplePlan { pairs, coef, determined, ranges, post }))
}

/// Visit every `k`-decoration of `c` (numerator `k` over `l`) whose leaves
/// satisfy `bounds`. The callback receives values indexed by node id.
/// Returns the number visited.
pub fn for_each_couple_decoration<F: FnMut(&[i64])>(
    c: &Couple,
    k: i64,
    l: i64,
    bounds: &LeafBounds,
    mut f: F,
) -> Result<u64> {
    let Some(plan) = couple_plan(c, l, bounds)? else { return Ok(0) };
    let free: Vec<usize> = (0..plan.pairs.len()).filter(|&i| i != plan.determined).collect();
    let mut vals: Vec<i64> = free.iter().map(|&i| plan.ranges[i].0).collect();
    let mut values = vec![0i64; c.nodes().len()];
    let mut count = 0;
    loop {
        let mut rest = k;
        for (j, &i) in free.iter().enumerate() {
            rest -= plan.coef[i] * vals[j];
        }
        let xd = plan.coef[plan.determined] * rest;
        let (lo, hi) = plan.ranges[plan.determined];
        if xd >= lo && xd <= hi {
            for (j, &i) in free.iter().enumerate() {
                let (a, b) = plan.pairs[i];
                values[a] = vals[j];
                values[b] = vals[j];
            }
            let (a, b) = plan.pairs[plan.determined];
            values[a] = xd;
            values[b] = xd;
            fill_internal(c, &plan.post, &mut values);
            f(&values);
            count += 1;
        }
        // odometer
        let mut j = 0;
        loop {
            if j == free.len() {
                return Ok(count);
            }
            let i = free[j];
            if vals[j] < plan.ranges[i].1 {
                vals[j] += 1;
                break;
            }
            vals[j] = plan.ranges[i].0;
            j += 1;
        }
    }
}

/// All `k`-decorations of a couple under the given leaf bounds.
pub fn enumerate_decorations(c: &Couple, k: WaveNumber, bounds: &LeafBounds) -> Result<Vec<Decoration>> {
    let mut out = Vec::new();
    for_each_couple_decoration(c, k.num, k.l, bounds, |v| out.push(Decoration { l: k.l, values: v.to_vec() }))?;
    Ok(out)
}

/// Visit every `k`-decoration of a single tree with all leaves in
/// `[-window, window]`.
pub fn for_each_tree_decoration<F: FnMut(&[i64])>(t: &SignedTernaryTree, k: i64, window: i64, mut f: F) -> Result<u64> {
    let leaves = t.leaves();
    let post = t.postorder_branching_from(t.root());
    let zr = t.root_sign().value();
    let mut values = vec![0i64; t.nodes().len()];
    let last = *leaves.last().expect("a tree has a leaf");
    let free = &leaves[..leaves.len() - 1];
    let mut vals = vec![-window; free.len()];
    let mut count = 0;
    loop {
        let mut s = zr * k;
        for (j, &leaf) in free.iter().enumerate() {
            values[leaf] = vals[j];
            s -= t.sign(leaf).value() * vals[j];
        }
        let xl = t.sign(last).value() * s;
        if xl.abs() <= window {
            values[last] = xl;
            fill_internal(t, &post, &mut values);
            f(&values);
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == free.len() {
                return Ok(count);
            }
            if vals[j] < window {
                vals[j] += 1;
                break;
            }
            vals[j] = -window;
            j += 1;
        }
    }
}
