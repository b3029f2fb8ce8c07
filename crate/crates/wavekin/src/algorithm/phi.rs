//! Injection of two-vector tuples into three-vector tuples.
//!
//! Operations 5 to 8 map to the most recent three-vector slot before them.
//! Operation 0 looks at the tuple that follows it: if that is not one of
//! 5 to 8 it maps backwards as well; a following 5 sends it to the next
//! slot after it, and a following 6 to the next slot after it that does
//! not directly follow a 6.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::tree::{build_operation_tuples, OperationTree, OperationTuple, TupleSets};
use crate::error::{Error, Result};

/// Most recent three-vector slot strictly before `t`, walking up through
/// ancestor nodes.
fn most_recent_before(ot: &OperationTree, t: OperationTuple) -> Option<OperationTuple> {
    let recs = ot.records(t.n);
    let i = recs.iter().position(|r| r.subscript == t.k && r.kind == t.o)?;
    if let Some(r) = recs[..i].iter().rev().find(|r| r.tuple().is_three_vector_slot()) {
        return Some(r.tuple());
    }
    let mut n = t.n / 2;
    while n >= 1 {
        if let Some(r) = ot.records(n).iter().rev().find(|r| r.tuple().is_three_vector_slot()) {
            return Some(r.tuple());
        }
        n /= 2;
    }
    None
}

/// Three-vector slots after `t` in its own node, in order.
fn slots_after(ot: &OperationTree, t: OperationTuple) -> Vec<(usize, OperationTuple)> {
    let recs = ot.records(t.n);
    let Some(i) = recs.iter().position(|r| r.subscript == t.k && r.kind == t.o) else {
        return vec![];
    };
    (i + 1..recs.len()).map(|j| (j, recs[j].tuple())).filter(|(_, x)| x.is_three_vector_slot()).collect()
}

fn map_one(ot: &OperationTree, sets: &TupleSets, t: OperationTuple) -> std::result::Result<OperationTuple, String> {
    let missing = || format!("no target for {t}");
    if (5..=8).contains(&t.o) {
        return most_recent_before(ot, t).ok_or_else(missing);
    }
    debug_assert_eq!(t.o, 0);
    let next = sets.next.get(&t).copied();
    match next.map(|x| x.o) {
        Some(5) => slots_after(ot, t).first().map(|x| x.1).ok_or_else(missing),
        Some(6) => {
            let recs = ot.records(t.n);
            slots_after(ot, t)
                .into_iter()
                .find(|&(j, _)| recs[j - 1].kind != 6)
                .map(|x| x.1)
                .ok_or_else(missing)
        }
        Some(o @ (7 | 8)) => Err(format!("{t} is followed by operation {o}")),
        _ => most_recent_before(ot, t).ok_or_else(missing),
    }
}

/// The map on every two-vector tuple; an unmappable tuple is a contract
/// violation.
pub fn phi_map(ot: &OperationTree) -> Result<BTreeMap<OperationTuple, OperationTuple>> {
    let sets = build_operation_tuples(ot);
    sets.t2
        .iter()
        .map(|&t| map_one(ot, &sets, t).map(|x| (t, x)).map_err(Error::Contract))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhiReport {
    pub t2: usize,
    pub t3: usize,
    pub well_defined: bool,
    pub injective: bool,
    pub same_node: bool,
    pub leaves: usize,
    /// Three-vector slots outside the image.
    pub missed: Vec<OperationTuple>,
    /// Every leaf node holds at least one missed slot.
    pub missed_in_every_leaf: bool,
    pub mapping: Vec<(OperationTuple, OperationTuple)>,
    pub violations: Vec<String>,
    pub pass: bool,
}

pub fn verify_phi(ot: &OperationTree) -> PhiReport {
    let sets = build_operation_tuples(ot);
    let mut violations = Vec::new();
    let mut mapping = Vec::new();
    for &t in &sets.t2 {
        match map_one(ot, &sets, t) {
            Ok(x) => mapping.push((t, x)),
            Err(e) => violations.push(e),
        }
    }
    let well_defined = mapping.len() == sets.t2.len();
    let mut seen = BTreeSet::new();
    let mut injective = true;
    for &(t, x) in &mapping {
        if !seen.insert(x) {
            injective = false;
            violations.push(format!("{x} is the image of more than one tuple, including {t}"));
        }
    }
    let mut same_node = true;
    for &(t, x) in &mapping {
        if t.n != x.n {
            same_node = false;
            violations.push(format!("{t} maps across nodes to {x}"));
        }
    }
    let missed: Vec<OperationTuple> = sets.t3.iter().copied().filter(|x| !seen.contains(x)).collect();
    let leaves = ot.leaves();
    let missed_in_every_leaf = leaves.iter().all(|&l| missed.iter().any(|x| x.n == l));
    if !missed_in_every_leaf {
        violations.push("a leaf has every slot in the image".into());
    }
    if missed.len() < leaves.len() {
        violations.push(format!("{} missed slots for {} leaves", missed.len(), leaves.len()));
    }
    PhiReport {
        t2: sets.t2.len(),
        t3: sets.t3.len(),
        well_defined,
        injective,
        same_node,
        leaves: leaves.len(),
        pass: violations.is_empty(),
        missed,
        missed_in_every_leaf,
        mapping,
        violations,
    }
}
