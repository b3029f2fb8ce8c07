//! Operation records, operation trees and operation tuples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CountingClass {
    Bridge,
    Sole,
    TwoVector,
    ThreeVector,
    SelfLoop,
}

impl CountingClass {
    pub fn of(kind: u8) -> Self {
        match kind {
            1 => CountingClass::Bridge,
            9 => CountingClass::Sole,
            0 | 5..=8 => CountingClass::TwoVector,
            2..=4 => CountingClass::ThreeVector,
            10 => CountingClass::SelfLoop,
            _ => panic!("operation kind {kind} out of range"),
        }
    }

    /// Change in the Euler characteristic of the removed part.
    pub fn delta_chi(self) -> i32 {
        match self {
            CountingClass::Bridge | CountingClass::Sole => 0,
            CountingClass::TwoVector | CountingClass::SelfLoop => -1,
            CountingClass::ThreeVector => -2,
        }
    }

    /// Counting cost as a monomial in `L`, `T`, `D`.
    pub fn cost(self) -> &'static str {
        match self {
            CountingClass::Bridge | CountingClass::Sole | CountingClass::SelfLoop => "1",
            CountingClass::TwoVector => "L",
            CountingClass::ThreeVector => "L^(2+theta) T^-1 D^(2-sigma)",
        }
    }
}

/// One executed operation, or the `1_0` record opening a child node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OperationRecord {
    /// Position in the trace; absent for `1_0` records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub kind: u8,
    /// `'a'..='d'` for Operation 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcase: Option<char>,
    /// Display ids of removed atoms.
    pub atoms: Vec<u32>,
    /// Ids of removed bonds.
    pub bonds: Vec<usize>,
    pub component_id: u64,
    pub subscript: usize,
    pub delta_chi: i32,
    pub counting_class: CountingClass,
    /// Touches an atom flagged degenerate (relaxed mode only).
    #[serde(default)]
    pub degenerate: bool,
}

impl OperationRecord {
    /// `"{kind}_{subscript}"`.
    pub fn label(&self) -> String {
        format!("{}_{}", self.kind, self.subscript)
    }

    pub fn tuple(&self) -> OperationTuple {
        OperationTuple { n: self.component_id, k: self.subscript, o: self.kind }
    }
}

/// Binary tree of per-component record lists; root `1`, children of `n`
/// are `2n` and `2n + 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationTree {
    pub nodes: BTreeMap<u64, Vec<OperationRecord>>,
}

impl OperationTree {
    pub fn records(&self, n: u64) -> &[OperationRecord] {
        self.nodes.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn labels(&self, n: u64) -> Vec<String> {
        self.records(n).iter().map(OperationRecord::label).collect()
    }

    pub fn has_children(&self, n: u64) -> bool {
        n.checked_mul(2).is_some_and(|c| self.nodes.contains_key(&c))
    }

    pub fn leaves(&self) -> Vec<u64> {
        self.nodes.keys().copied().filter(|&n| !self.has_children(n)).collect()
    }

    /// `a` is a proper ancestor of `b`.
    pub fn is_ancestor(a: u64, b: u64) -> bool {
        if a == 0 || b <= a {
            return false;
        }
        let shift = (63 - b.leading_zeros()) - (63 - a.leading_zeros());
        b >> shift == a
    }

    /// Structural checks: `1` is present, every non-root node has a parent
    /// that ends with a `1` record and starts with `1_0`, and subscripts
    /// follow the counting rule.
    pub fn validate(&self) -> Result<()> {
        if !self.nodes.contains_key(&1) {
            return Err(Error::Data("operation tree has no root".into()));
        }
        for (&n, recs) in &self.nodes {
            if n != 1 {
                let p = n / 2;
                let closes = self.records(p).last().is_some_and(|r| r.kind == 1);
                if !closes || recs.first().is_none_or(|r| r.kind != 1 || r.subscript != 0) {
                    return Err(Error::Data(format!("node {n} is not opened by a bridge in node {p}")));
                }
            }
            if self.has_children(n) != self.nodes.contains_key(&(2 * n + 1)) {
                return Err(Error::Data(format!("node {n} has one child")));
            }
            let mut expect = if n == 1 { 1 } else { 0 };
            for r in recs {
                if r.subscript != expect || r.component_id != n {
                    return Err(Error::Data(format!("record {} in node {n} out of sequence", r.label())));
                }
                if !matches!(r.kind, 9 | 10) {
                    expect += 1;
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: serde_json::Map<String, serde_json::Value> = self
            .nodes
            .iter()
            .map(|(n, r)| (n.to_string(), serde_json::to_value(r).expect("serializable")))
            .collect();
        let labels: serde_json::Map<String, serde_json::Value> =
            self.nodes.keys().map(|&n| (n.to_string(), serde_json::json!(self.labels(n)))).collect();
        serde_json::json!({ "schemaVersion": SCHEMA_VERSION, "nodes": nodes, "labels": labels })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let nodes = v.get("nodes").and_then(|x| x.as_object()).ok_or_else(|| Error::Data("missing nodes".into()))?;
        let mut out = OperationTree::default();
        for (k, recs) in nodes {
            let n: u64 = k.parse().map_err(|_| Error::Data(format!("bad node id {k}")))?;
            out.nodes.insert(n, serde_json::from_value(recs.clone())?);
        }
        out.validate()?;
        Ok(out)
    }

    /// Tree from compact labels such as `["3_1", "9_2"]` per node; used for
    /// hand-written fixtures.
    pub fn from_labels(nodes: &[(u64, &[&str])]) -> Result<Self> {
        let mut out = OperationTree::default();
        for &(n, labels) in nodes {
            let recs = labels
                .iter()
                .map(|s| {
                    let (o, k) = s.split_once('_').ok_or_else(|| Error::Data(format!("bad label {s}")))?;
                    let kind: u8 = o.parse().map_err(|_| Error::Data(format!("bad label {s}")))?;
                    let subscript: usize = k.parse().map_err(|_| Error::Data(format!("bad label {s}")))?;
                    if kind > 10 {
                        return Err(Error::Data(format!("bad label {s}")));
                    }
                    let class = CountingClass::of(kind);
                    Ok(OperationRecord {
                        step: None,
                        kind,
                        subcase: None,
                        atoms: vec![],
                        bonds: vec![],
                        component_id: n,
                        subscript,
                        delta_chi: class.delta_chi(),
                        counting_class: class,
                        degenerate: false,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.nodes.insert(n, recs);
        }
        out.validate()?;
        Ok(out)
    }
}

/// `(n, k, o)`: node, subscript, operation kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OperationTuple {
    pub n: u64,
    pub k: usize,
    pub o: u8,
}

impl OperationTuple {
    pub fn is_three_vector_slot(&self) -> bool {
        (1..=4).contains(&self.o)
    }

    pub fn is_two_vector(&self) -> bool {
        self.o == 0 || (5..=8).contains(&self.o)
    }

    /// Partial order: an ancestor node, or the same node with smaller `k`.
    pub fn is_before(&self, other: &OperationTuple) -> bool {
        (self.n == other.n && self.k < other.k) || OperationTree::is_ancestor(self.n, other.n)
    }
}

impl std::fmt::Display for OperationTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n, self.k, self.o)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TupleSets {
    pub all: Vec<OperationTuple>,
    pub t2: Vec<OperationTuple>,
    pub t3: Vec<OperationTuple>,
    /// Following tuple in the same node, for tuples with `o != 1`.
    pub next: BTreeMap<OperationTuple, OperationTuple>,
    /// Tuple recorded just before, crossing into the parent node for `1_0`.
    pub preceded_by: BTreeMap<OperationTuple, OperationTuple>,
}

pub fn build_operation_tuples(ot: &OperationTree) -> TupleSets {
    let mut s = TupleSets::default();
    for (&n, recs) in &ot.nodes {
        let tuples: Vec<OperationTuple> = recs.iter().map(OperationRecord::tuple).collect();
        for (i, &t) in tuples.iter().enumerate() {
            s.all.push(t);
            if t.is_three_vector_slot() {
                s.t3.push(t);
            }
            if t.is_two_vector() {
                s.t2.push(t);
            }
            if t.o != 1 {
                if let Some(&nx) = tuples.get(i + 1) {
                    s.next.insert(t, nx);
                }
            }
            let prev = if i > 0 {
                Some(tuples[i - 1])
            } else if n > 1 {
                ot.records(n / 2).last().map(OperationRecord::tuple)
            } else {
                None
            };
            if let Some(p) = prev {
                s.preceded_by.insert(t, p);
            }
        }
    }
    s
}

/// Operation counts by class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationCounts {
    pub m0: usize,
    pub m1: usize,
    pub m2: usize,
    pub m3: usize,
    pub m4: usize,
}

impl OperationCounts {
    pub fn add(&mut self, kind: u8) {
        match CountingClass::of(kind) {
            CountingClass::Bridge => self.m0 += 1,
            CountingClass::Sole => self.m1 += 1,
            CountingClass::TwoVector => self.m2 += 1,
            CountingClass::ThreeVector => self.m3 += 1,
            CountingClass::SelfLoop => self.m4 += 1,
        }
    }
}
