//! The prioritized reduction: detection of Operations 0 to 10, tie-breaking,
//! operation-tree bookkeeping and per-step monitors.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::tree::{CountingClass, OperationCounts, OperationRecord, OperationTree};
use super::work::Work;
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::molecules::{find_forbidden_triangle, Molecule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Mode {
    #[default]
    Strict,
    /// Degree-2 roots, self-loops (Operation 10) and degenerate atoms.
    Relaxed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TieBreak {
    #[default]
    LowestId,
    Random(u64),
}

impl std::str::FromStr for TieBreak {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "lowest-id" {
            return Ok(TieBreak::LowestId);
        }
        s.strip_prefix("random:")
            .and_then(|x| x.parse().ok())
            .map(TieBreak::Random)
            .ok_or_else(|| Error::Usage(format!("tie-break `{s}`: expected lowest-id or random:<seed>")))
    }
}

/// How the next operation is found.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Scan {
    /// Lowest-numbered applicable operation.
    #[default]
    Priority,
    /// Resume at the jump target of the previous operation.
    JumpTable,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub mode: Mode,
    pub tie_break: TieBreak,
    pub scan: Scan,
    /// Atom ids flagged degenerate (relaxed mode).
    pub degenerate: BTreeSet<u32>,
    /// Atom ids flagged fully degenerate (relaxed mode); a degree-2 root in
    /// this set is removed before the main loop.
    pub fully_degenerate: BTreeSet<u32>,
}

impl RunOptions {
    pub fn strict(tie_break: TieBreak) -> Self {
        RunOptions { tie_break, ..Default::default() }
    }

    pub fn relaxed(tie_break: TieBreak) -> Self {
        RunOptions { mode: Mode::Relaxed, tie_break, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MonitorViolation {
    pub step: usize,
    pub monitor: String,
    pub detail: String,
}

/// Removal made before the main loop (fully degenerate degree-2 root).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PreludeRemoval {
    pub atom: u32,
    pub bonds: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmRun {
    pub tree: OperationTree,
    pub counts: OperationCounts,
    pub trace: Vec<OperationRecord>,
    pub monitors: Vec<MonitorViolation>,
    /// Atoms entering the main loop.
    pub n: usize,
    pub mode: Mode,
    pub scan: Scan,
    pub degree_two_root: bool,
    pub prelude: Vec<PreludeRemoval>,
    /// Three-vector operations touching a flagged degenerate atom.
    pub degenerate_three_vector: usize,
    /// Jump-table scans that ran past the last operation and wrapped.
    pub wrapped_scans: usize,
}

impl AlgorithmRun {
    /// Kind sequence of the trace.
    pub fn kinds(&self) -> Vec<u8> {
        self.trace.iter().map(|r| r.kind).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "counts": self.counts,
            "n": self.n,
            "mode": self.mode,
            "scan": self.scan,
            "degreeTwoRoot": self.degree_two_root,
            "prelude": self.prelude,
            "degenerateThreeVector": self.degenerate_three_vector,
            "wrappedScans": self.wrapped_scans,
            "monitors": self.monitors,
            "tree": self.tree.to_json(),
        })
    }

    /// CSV with columns `step,opKind,atoms,bonds,componentId`; lists are
    /// space separated.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("step,opKind,atoms,bonds,componentId\n");
        for r in &self.trace {
            let atoms: Vec<String> = r.atoms.iter().map(u32::to_string).collect();
            let bonds: Vec<String> = r.bonds.iter().map(usize::to_string).collect();
            let kind = match r.subcase {
                Some(c) => format!("{}{}", r.kind, c),
                None => r.kind.to_string(),
            };
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.step.unwrap_or(0),
                kind,
                atoms.join(" "),
                bonds.join(" "),
                r.component_id
            ));
        }
        s
    }
}

/// Scan order; Operation 10 is tried before Operation 9.
const ORDER: [u8; 11] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 9];

/// Where the jump table resumes after each operation.
pub fn jump_target(kind: u8) -> u8 {
    match kind {
        0 | 1 | 3 => 0,
        2 => 1,
        4..=10 => 1,
        _ => unreachable!("kind {kind}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Atom(usize, Option<char>),
    Bond(usize),
}

/// Applicable targets of one operation, in lowest-id order.
fn candidates(w: &Work, kind: u8) -> Vec<Target> {
    if kind == 1 {
        let mut b = w.bridges();
        b.sort_by_key(|&e| {
            let (x, y) = w.ends[e];
            let (a, c) = (w.ids[x].min(w.ids[y]), w.ids[x].max(w.ids[y]));
            (a, c, e)
        });
        return b.into_iter().map(Target::Bond).collect();
    }
    let mut out: Vec<Target> = w.atoms().filter_map(|v| atom_case(w, v, kind).map(|s| Target::Atom(v, s))).collect();
    out.sort_by_key(|t| match *t {
        Target::Atom(v, _) => w.ids[v],
        Target::Bond(_) => unreachable!(),
    });
    out
}

/// `Some(subcase)` when Operation `kind` applies at atom `v`.
fn atom_case(w: &Work, v: usize, kind: u8) -> Option<Option<char>> {
    let deg = w.degree(v);
    let loops = w.loops(v);
    let yes = Some(None);
    match kind {
        0 => w.is_double_degree_two(v).then_some(None),
        2..=4 => {
            if deg != 3 || loops > 0 {
                return None;
            }
            let nb = w.neighbours(v);
            let maxm = nb.iter().map(|x| x.1).max().unwrap_or(0);
            match (kind, maxm) {
                (2, 3) | (3, 2) | (4, 1) => yes,
                _ => None,
            }
        }
        5..=8 => {
            if deg != 2 || loops > 0 {
                return None;
            }
            let nb = w.neighbours(v);
            let [(b, 1), (c, 1)] = nb.as_slice() else { return None };
            let (b, c) = (*b, *c);
            let mu = w.multiplicity(b, c);
            let (db, dc) = (w.has_double(b), w.has_double(c));
            match kind {
                5 => {
                    if mu == 2 {
                        Some(Some('a'))
                    } else if mu == 1 && single_bond_becomes_bridge(w, v, b, c) {
                        Some(Some('b'))
                    } else if mu == 1 && !db && !dc {
                        Some(Some('c'))
                    } else if mu == 0 {
                        Some(Some('d'))
                    } else {
                        None
                    }
                }
                6 => (mu == 1 && db != dc).then_some(None),
                7 => (mu == 3).then_some(None),
                8 => (mu == 1 && db && dc).then_some(None),
                _ => unreachable!(),
            }
        }
        9 => (deg == 0).then_some(None),
        10 => (deg == 2 && loops == 1).then_some(None),
        _ => None,
    }
}

/// Whether the single bond `b`-`c` would be a bridge once `v` is removed.
fn single_bond_becomes_bridge(w: &Work, v: usize, b: usize, c: usize) -> bool {
    let Some(bc) = w.live_bonds(b).find(|&e| !w.is_loop(e) && w.other(e, b) == c) else {
        return false;
    };
    !w.reach(b, Some(v), Some(bc)).contains(&c)
}

struct Builder {
    tree: OperationTree,
    counter: BTreeMap<u64, usize>,
    node_of: Vec<u64>,
}

impl Builder {
    fn push(&mut self, node: u64, mut rec: OperationRecord) {
        let i = self.counter.entry(node).or_insert(1);
        rec.subscript = *i;
        rec.component_id = node;
        if !matches!(rec.kind, 9 | 10) {
            *i += 1;
        }
        self.tree.nodes.entry(node).or_default().push(rec);
    }

    fn open_child(&mut self, child: u64, bridge: usize) {
        let class = CountingClass::Bridge;
        self.tree.nodes.insert(
            child,
            vec![OperationRecord {
                step: None,
                kind: 1,
                subcase: None,
                atoms: vec![],
                bonds: vec![bridge],
                component_id: child,
                subscript: 0,
                delta_chi: class.delta_chi(),
                counting_class: class,
                degenerate: false,
            }],
        );
        self.counter.insert(child, 1);
    }
}

fn check_strict(m: &Molecule, w: &Work, opts: &RunOptions) -> Result<()> {
    let comps = w.components().len();
    if comps != 1 {
        return Err(Error::Domain(format!("assumption violated: molecule is not connected ({comps} components)")));
    }
    if let Some(b) = m.bonds.iter().find(|b| b.is_loop()) {
        return Err(Error::Domain(format!(
            "assumption violated: no degenerate atoms (atom {} has a self-connecting bond)",
            m.atoms[b.from].id
        )));
    }
    if !opts.degenerate.is_empty() || !opts.fully_degenerate.is_empty() {
        return Err(Error::Domain("assumption violated: no degenerate atoms (flags given in strict mode)".into()));
    }
    let degs: Vec<usize> = w.atoms().map(|v| w.degree(v)).collect();
    let threes = degs.iter().filter(|&&d| d == 3).count();
    if threes != 2 || degs.iter().any(|&d| d != 3 && d != 4) {
        return Err(Error::Domain(format!(
            "assumption violated: two degree-3 atoms and the rest degree 4 (degrees {degs:?})"
        )));
    }
    Ok(())
}

/// Remove a fully degenerate degree-2 root and, while the removed atom was
/// held by a double bond, the degree-2 atom behind it.
fn prelude(w: &mut Work, opts: &RunOptions) -> Vec<PreludeRemoval> {
    let mut out = Vec::new();
    let flagged = |w: &Work, v: usize| opts.fully_degenerate.contains(&w.ids[v]);
    let roots: Vec<usize> = w.atoms().filter(|&v| w.degree(v) == 2).collect();
    let [root] = roots.as_slice() else { return out };
    // a lone atom with a self-connecting bond is fully degenerate
    if !flagged(w, *root) && w.loops(*root) == 0 {
        return out;
    }
    let mut cur = Some(*root);
    while let Some(v) = cur {
        let nb = w.neighbours(v);
        let next = match nb.as_slice() {
            [(u, 2)] => Some(*u),
            _ => None,
        };
        let bonds = w.remove_atom(v);
        out.push(PreludeRemoval { atom: w.ids[v], bonds });
        // through a double bond the whole chain is fully degenerate
        cur = next.filter(|&u| w.degree(u) == 2 && w.loops(u) == 0);
    }
    out
}

/// Run the reduction on `m` until every atom is removed.
pub fn run_algorithm(m: &Molecule, opts: &RunOptions) -> Result<AlgorithmRun> {
    let mut w = Work::new(m);
    if opts.mode == Mode::Strict {
        check_strict(m, &w, opts)?;
    }
    let degree_two_root =
        opts.mode == Mode::Relaxed && w.atoms().filter(|&v| w.degree(v) == 2).count() == 1 && w.atoms().all(|v| w.degree(v) >= 2);
    let prelude = if opts.mode == Mode::Relaxed { prelude(&mut w, opts) } else { Vec::new() };
    let n = w.atoms().count();
    let mut monitors = Vec::new();
    if opts.mode == Mode::Strict {
        if let Some((pat, tri)) = find_forbidden_triangle(m) {
            let ids: Vec<u32> = tri.iter().map(|&v| m.atoms[v].id).collect();
            monitors.push(MonitorViolation { step: 0, monitor: "forbiddenTriangle".into(), detail: format!("pattern {pat} at {ids:?}") });
        }
    }
    let mut b = Builder { tree: OperationTree::default(), counter: BTreeMap::new(), node_of: vec![1; m.atom_count()] };
    if n > 0 {
        b.tree.nodes.insert(1, Vec::new());
        b.counter.insert(1, 1);
    }
    let mut rng = match opts.tie_break {
        TieBreak::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        TieBreak::LowestId => None,
    };
    let enabled = |k: u8| k != 10 || opts.mode == Mode::Relaxed;
    let mut counts = OperationCounts::default();
    let mut trace = Vec::new();
    let mut start = if opts.scan == Scan::Priority { 0 } else { 1 };
    let mut wrapped_scans = 0;
    let mut step = 0;
    while w.atoms().next().is_some() {
        step += 1;
        let from = if opts.scan == Scan::Priority { 0 } else { start };
        let pos0 = ORDER.iter().position(|&k| k == from).expect("in order");
        let mut found = None;
        for (i, &k) in ORDER.iter().enumerate().cycle().skip(pos0).take(ORDER.len()) {
            if !enabled(k) {
                continue;
            }
            let c = candidates(&w, k);
            if !c.is_empty() {
                if i < pos0 {
                    wrapped_scans += 1;
                }
                found = Some((k, c));
                break;
            }
        }
        let Some((kind, cands)) = found else {
            let left: Vec<(u32, usize)> = w.atoms().map(|v| (w.ids[v], w.degree(v))).collect();
            return Err(Error::Theory(format!("step {step}: no operation applies; remaining (atom, degree) {left:?}")));
        };
        let pick = match rng.as_mut() {
            Some(r) => cands[r.random_range(0..cands.len())],
            None => cands[0],
        };
        let d2_before = w.count_double_degree_two();
        let sole_before: BTreeSet<usize> = w.atoms().filter(|&v| w.degree(v) == 0).collect();
        let comps_before = w.components().len();
        let class = CountingClass::of(kind);
        let mut rec = OperationRecord {
            step: Some(step),
            kind,
            subcase: None,
            atoms: vec![],
            bonds: vec![],
            component_id: 0,
            subscript: 0,
            delta_chi: class.delta_chi(),
            counting_class: class,
            degenerate: false,
        };
        let mut touched: Vec<usize> = Vec::new();
        match pick {
            Target::Bond(e) => {
                let (x, y) = w.ends[e];
                let node = b.node_of[x];
                w.remove_bond(e);
                rec.bonds = vec![e];
                touched.extend([x, y]);
                b.push(node, rec.clone());
                let mut sides = [w.reach(x, None, None), w.reach(y, None, None)];
                let key = |s: &Vec<usize>| (s.len(), s.iter().map(|&v| w.ids[v]).min().unwrap_or(0));
                if key(&sides[1]) < key(&sides[0]) {
                    sides.swap(0, 1);
                }
                let left = node.checked_mul(2).filter(|l| l.checked_add(1).is_some()).ok_or_else(|| {
                    Error::Resource(format!("operation tree deeper than 62 levels at node {node}"))
                })?;
                for (child, side) in [(left, &sides[0]), (left + 1, &sides[1])] {
                    b.open_child(child, e);
                    for &v in side {
                        b.node_of[v] = child;
                    }
                }
            }
            Target::Atom(v, sub) => {
                let node = b.node_of[v];
                rec.subcase = sub;
                rec.atoms = vec![w.ids[v]];
                touched.push(v);
                touched.extend(w.neighbours(v).iter().map(|x| x.0));
                rec.bonds = w.remove_atom(v);
                b.push(node, rec.clone());
            }
        }
        let flagged = touched.iter().any(|&v| opts.degenerate.contains(&w.ids[v]));
        let last = b.tree.nodes.values_mut().flat_map(|r| r.iter_mut()).find(|r| r.step == Some(step)).expect("pushed");
        last.degenerate = flagged;
        rec = last.clone();
        counts.add(kind);
        monitor_step(&w, &rec, &touched, d2_before, &sole_before, comps_before, &mut monitors);
        trace.push(rec);
        start = jump_target(kind);
    }
    let degenerate_three_vector =
        trace.iter().filter(|r| r.degenerate && r.counting_class == CountingClass::ThreeVector).count();
    for leaf in b.tree.leaves() {
        if !leaf_property(leaf, b.tree.records(leaf)) {
            monitors.push(MonitorViolation {
                step,
                monitor: "leafProperty".into(),
                detail: format!("leaf {leaf} = {:?}", b.tree.labels(leaf)),
            });
        }
    }
    Ok(AlgorithmRun {
        tree: b.tree,
        counts,
        trace,
        monitors,
        n,
        mode: opts.mode,
        scan: opts.scan,
        degree_two_root,
        prelude,
        degenerate_three_vector,
        wrapped_scans,
    })
}

/// `[1_0, 9_1]`, or at least three records ending `2, 9` (Operation 10 may
/// stand in for 9). The root has no opening `1_0`, so two records suffice
/// there.
pub fn leaf_property(node: u64, recs: &[OperationRecord]) -> bool {
    let kinds: Vec<u8> = recs.iter().map(|r| r.kind).collect();
    let end = |k: u8| k == 9 || k == 10;
    let min_len = if node == 1 { 2 } else { 3 };
    match kinds.as_slice() {
        [1, k] if recs[0].subscript == 0 && end(*k) => true,
        [.., 2, k] if kinds.len() >= min_len && end(*k) => true,
        _ => false,
    }
}

fn monitor_step(
    w: &Work,
    rec: &OperationRecord,
    touched: &[usize],
    d2_before: usize,
    sole_before: &BTreeSet<usize>,
    comps_before: usize,
    out: &mut Vec<MonitorViolation>,
) {
    let step = rec.step.expect("executed");
    let kind = rec.kind;
    let mut flag = |monitor: &str, detail: String| out.push(MonitorViolation { step, monitor: monitor.into(), detail });
    let d2 = w.count_double_degree_two();
    let limit = match kind {
        2 | 4..=10 => Some(0),
        3 => Some(d2_before + 1),
        1 => Some(d2_before + 2),
        0 => Some(1),
        _ => None,
    };
    if let Some(lim) = limit {
        if d2 > lim {
            flag("doubleDegreeTwo", format!("operation {kind} leaves {d2} degree-2 atoms with a double bond"));
        }
    }
    if (5..=8).contains(&kind) {
        let mut comp: BTreeSet<usize> = BTreeSet::new();
        for &v in &touched[1..] {
            comp.extend(w.reach(v, None, None));
        }
        let odd = comp.iter().filter(|&&v| matches!(w.degree(v), 1 | 3)).count();
        if odd < 2 {
            flag("oddDegreeAtoms", format!("operation {kind} leaves {odd} atoms of degree 1 or 3"));
        }
    }
    let new_sole: Vec<u32> =
        w.atoms().filter(|&v| w.degree(v) == 0 && !sole_before.contains(&v)).map(|v| w.ids[v]).collect();
    if !new_sole.is_empty() && !matches!(kind, 1 | 2) {
        flag("soleAtom", format!("operation {kind} creates sole atoms {new_sole:?}"));
    }
    let comps = w.components().len();
    let expect = match kind {
        1 => comps_before + 1,
        9 | 10 => comps_before - 1,
        _ => comps_before,
    };
    if comps != expect {
        flag("componentSplit", format!("operation {kind} changes the component count {comps_before} -> {comps}"));
    }
}
