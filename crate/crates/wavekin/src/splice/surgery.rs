//! Splicing CL chains out of couples, splice-set selection and the
//! pre-processing pass.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::chains::{classify_chain_objects, classify_chain_objects_in, ChainKind, ChainObject, ChainScope};
use super::twist::admissible_site;
use crate::combinatorics::{child_sign, Couple, Decoration, Diagram, Node, NodeId, SpliceNote};
use crate::error::{Error, Result};
use crate::lattice::WaveNumber;
use crate::molecules::build_molecule;

/// Node roles along a couple-level CL chain `(n_0, ..., n_q)`: `n_{j-1}`
/// has leaf `m[j-1]` paired with leaf `p[j-1]` of `n_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClChain {
    pub nodes: Vec<NodeId>,
    pub m: Vec<NodeId>,
    pub p: Vec<NodeId>,
    /// Remaining child of `n_0`.
    pub top_rest: Option<NodeId>,
    /// Remaining children of `n_q`, in slot order.
    pub tail: Option<[NodeId; 2]>,
    /// Every `n_j` has sign opposite to `m_j`.
    pub irregular: bool,
}

impl ClChain {
    pub fn q(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Check that `nodes` is a CL chain of `c` and name its parts.
pub fn cl_chain(c: &Couple, nodes: &[NodeId]) -> Result<ClChain> {
    let bad = |msg: String| Error::Domain(format!("not a CL chain: {msg}"));
    let (&n0, rest) = nodes.split_first().ok_or_else(|| bad("empty".into()))?;
    if n0 >= c.nodes().len() || c.is_leaf(n0) {
        return Err(bad(format!("{n0} is not a branching node")));
    }
    let (mut m, mut p) = (Vec::new(), Vec::new());
    for (j, &nj) in rest.iter().enumerate() {
        let prev = nodes[j];
        let site = admissible_site(c, nj).filter(|s| s.n1 == prev).ok_or_else(|| {
            bad(format!("{nj} is not joined to its parent {prev} by a CL double bond"))
        })?;
        m.push(site.n12);
        p.push(site.n21);
    }
    let q = rest.len();
    let (top_rest, tail) = if q == 0 {
        (None, None)
    } else {
        let k0 = c.node(n0).children.expect("branching");
        let top = *k0.iter().find(|&&x| x != nodes[1] && x != m[0]).expect("third child");
        let kq = c.node(nodes[q]).children.expect("branching");
        let t: Vec<NodeId> = kq.iter().copied().filter(|&x| x != p[q - 1]).collect();
        (Some(top), Some([t[0], t[1]]))
    };
    let irregular = (0..q).all(|j| c.sign(rest[j]) != c.sign(m[j]));
    Ok(ClChain { nodes: nodes.to_vec(), m, p, top_rest, tail, irregular })
}

/// Result of splicing: the new couple and, per old id, its new id.
#[derive(Clone, Debug)]
pub struct Spliced {
    pub couple: Couple,
    pub map: Vec<Option<NodeId>>,
}

impl Spliced {
    /// Restrict a decoration of the original couple to the survivors.
    pub fn restrict(&self, dec: &Decoration) -> Decoration {
        let mut values = vec![0; self.couple.nodes().len()];
        for (old, new) in self.map.iter().enumerate() {
            if let Some(n) = new {
                values[*n] = dec.values[old];
            }
        }
        Decoration { l: dec.l, values }
    }
}

/// Splice `c` at the CL chain `chain`; the order drops by `q`.
pub fn splice(c: &Couple, chain: &[NodeId]) -> Result<Couple> {
    Ok(splice_many(c, &[(chain.to_vec(), ChainKind::Chain)])?.couple)
}

/// Splice a decorated couple; the surviving values are kept.
pub fn splice_decorated(c: &Couple, chain: &[NodeId], dec: &Decoration) -> Result<(Couple, Decoration)> {
    let s = splice_many(c, &[(chain.to_vec(), ChainKind::Chain)])?;
    let d = s.restrict(dec);
    Ok((s.couple, d))
}

/// Splice several node-disjoint CL chains at once.
pub fn splice_many(c: &Couple, chains: &[(Vec<NodeId>, ChainKind)]) -> Result<Spliced> {
    let parsed: Vec<(ClChain, ChainKind)> =
        chains.iter().map(|(nodes, k)| cl_chain(c, nodes).map(|x| (x, *k))).collect::<Result<_>>()?;
    let mut removed = BTreeSet::new();
    for (ch, _) in &parsed {
        for &v in ch.nodes[1..].iter().chain(&ch.m).chain(&ch.p) {
            if !removed.insert(v) {
                return Err(Error::Domain(format!("chains overlap at node {v}")));
            }
        }
    }
    let mut nodes: Vec<Node> = c.nodes().to_vec();
    let mut notes = c.spliced_at.clone();
    for (ch, kind) in &parsed {
        if ch.q() == 0 {
            continue;
        }
        let n0 = ch.nodes[0];
        if removed.contains(&n0) {
            return Err(Error::Domain(format!("chain top {n0} is removed by another chain")));
        }
        let top = ch.top_rest.expect("q > 0");
        let tail = ch.tail.expect("q > 0");
        let old = nodes[n0].children.expect("branching");
        let keep = old.iter().position(|&x| x == top).expect("child");
        let zeta = nodes[n0].sign;
        let free: Vec<usize> = (0..3).filter(|&i| i != keep).collect();
        let (s0, s1) = (nodes[tail[0]].sign, nodes[tail[1]].sign);
        let placed = if s0 == s1 || child_sign(zeta, free[0]) == s0 { [tail[0], tail[1]] } else { [tail[1], tail[0]] };
        let mut kids = old;
        for (slot, &x) in free.iter().zip(&placed) {
            if child_sign(zeta, *slot) != nodes[x].sign {
                return Err(Error::Domain(format!("splicing at {n0} cannot place node {x} by sign")));
            }
            kids[*slot] = x;
            nodes[x].parent = Some(n0);
        }
        nodes[n0].children = Some(kids);
        notes.push(SpliceNote { node: n0, q: ch.q(), kind: kind.as_str().to_string() });
    }
    let mut map = vec![None; nodes.len()];
    let mut next = 0;
    for (v, slot) in map.iter_mut().enumerate() {
        if !removed.contains(&v) {
            *slot = Some(next);
            next += 1;
        }
    }
    // a note on a node removed by this splice moves to the top of the chain
    // that removed it
    let absorbed: BTreeMap<NodeId, NodeId> =
        parsed.iter().flat_map(|(ch, _)| ch.nodes[1..].iter().map(|&v| (v, ch.nodes[0]))).collect();
    for note in &mut notes {
        while let Some(&top) = absorbed.get(&note.node) {
            note.node = top;
        }
    }
    let f = |v: NodeId| map[v].expect("survivor");
    let new_nodes: Vec<Node> = (0..nodes.len())
        .filter(|v| !removed.contains(v))
        .map(|v| {
            let n = nodes[v];
            Node { parent: n.parent.map(f), children: n.children.map(|k| k.map(f)), sign: n.sign }
        })
        .collect();
    let partner: Vec<Option<NodeId>> =
        (0..nodes.len()).filter(|v| !removed.contains(v)).map(|v| c.partner(v).map(f)).collect();
    let roots = c.roots().map(f);
    let mut out = Couple::from_parts(new_nodes, roots, partner)?;
    out.spliced_at = notes.into_iter().map(|s| SpliceNote { node: f(s.node), ..s }).collect();
    Ok(Spliced { couple: out, map })
}

/// Group a set of admissible nodes into maximal CL chains
/// `(parent, n_1, ..., n_q)` and splice them.
pub fn splice_at(c: &Couple, set: &BTreeSet<NodeId>, kinds: &BTreeMap<NodeId, ChainKind>) -> Result<Spliced> {
    let mut chains = Vec::new();
    for &v in set {
        let site = admissible_site(c, v).ok_or_else(|| Error::Domain(format!("node {v} is not admissible")))?;
        if set.contains(&site.n1) {
            continue;
        }
        let mut nodes = vec![site.n1, v];
        let mut cur = v;
        loop {
            let kids = c.node(cur).children.expect("branching");
            let next: Vec<NodeId> = kids
                .iter()
                .copied()
                .filter(|x| set.contains(x) && admissible_site(c, *x).is_some_and(|s| s.n1 == cur))
                .collect();
            match next.as_slice() {
                [] => break,
                [x] => {
                    nodes.push(*x);
                    cur = *x;
                }
                _ => return Err(Error::Domain(format!("node {cur} continues two chains"))),
            }
        }
        chains.push((nodes, kinds.get(&v).copied().unwrap_or(ChainKind::Chain)));
    }
    let covered: usize = chains.iter().map(|(n, _)| n.len() - 1).sum();
    if covered != set.len() {
        return Err(Error::Domain("splice set does not decompose into CL chains".into()));
    }
    splice_many(c, &chains)
}

/// How to pick the node left out of a hyperchain or pseudo-hyperchain
/// without a CN double bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exclusion {
    /// The admissible node whose atom has the largest display id.
    #[default]
    HighestId,
    /// The `i`-th admissible node in chain order (taken modulo the count).
    Index(usize),
}

/// The splice set for `selection` with the default exclusion, plus the
/// chain kind owning each selected node.
pub fn choose_splice_set(c: &Couple, selection: &[ChainObject]) -> Result<BTreeSet<NodeId>> {
    Ok(choose_splice_set_with(c, selection, Exclusion::HighestId)?.0)
}

pub fn choose_splice_set_with(
    c: &Couple,
    selection: &[ChainObject],
    exclusion: Exclusion,
) -> Result<(BTreeSet<NodeId>, BTreeMap<NodeId, ChainKind>)> {
    let mut set = BTreeSet::new();
    let mut kinds = BTreeMap::new();
    if selection.is_empty() {
        return Ok((set, kinds));
    }
    let m = build_molecule(c)?;
    let all = classify_chain_objects(&m);
    let neg = classify_chain_objects_in(&m, ChainScope::Negative);
    for ch in selection {
        if !all.contains(ch) && !neg.contains(ch) {
            return Err(Error::Domain(format!("chain {:?} is not a maximal chain of this couple", ch.atoms)));
        }
        let mut nodes = ch.admissible_nodes();
        if ch.kind != ChainKind::Chain && !ch.has_cn() && !nodes.is_empty() {
            let drop = match exclusion {
                Exclusion::HighestId => {
                    let id_of = |v: NodeId| m.atoms.iter().find(|a| a.node == Some(v)).map_or(0, |a| a.id);
                    (0..nodes.len()).max_by_key(|&i| id_of(nodes[i])).expect("nonempty")
                }
                Exclusion::Index(i) => i % nodes.len(),
            };
            nodes.remove(drop);
        }
        for v in nodes {
            set.insert(v);
            kinds.insert(v, ch.kind);
        }
    }
    Ok((set, kinds))
}

/// Splice every chain of the couple's molecule (all double bonds, not only
/// opposite ones) at its splice set. One pass.
pub fn preprocess(c: &Couple) -> Result<Couple> {
    preprocess_with(c, Exclusion::HighestId)
}

pub fn preprocess_with(c: &Couple, exclusion: Exclusion) -> Result<Couple> {
    if c.is_trivial() {
        return Ok(c.clone());
    }
    let m = build_molecule(c)?;
    let chains = classify_chain_objects(&m);
    let (set, kinds) = choose_splice_set_with(c, &chains, exclusion)?;
    if set.is_empty() {
        return Ok(c.clone());
    }
    Ok(splice_at(c, &set, &kinds)?.couple)
}

/// Repeat [`preprocess`] until a pass splices nothing. Returns the couple
/// and the number of passes that spliced.
pub fn preprocess_fixpoint(c: &Couple) -> Result<(Couple, usize)> {
    let mut cur = c.clone();
    let mut passes = 0;
    loop {
        let next = preprocess(&cur)?;
        if next.order() == cur.order() {
            return Ok((cur, passes));
        }
        passes += 1;
        cur = next;
    }
}

/// Gap `k(n_0) - k(top_rest)` of a decorated CL chain, checked against the
/// sign-normalised gap of every link.
pub fn couple_chain_gap(c: &Couple, chain: &ClChain, dec: &Decoration) -> Result<WaveNumber> {
    let top = chain.top_rest.ok_or_else(|| Error::Domain("a chain of length 0 has no gap".into()))?;
    if !chain.irregular {
        return Err(Error::Domain("gap is defined for irregular chains only".into()));
    }
    let n0 = chain.nodes[0];
    let h = dec.values[n0] - dec.values[top];
    let z0 = c.sign(n0).value();
    for j in 1..chain.nodes.len() {
        let nj = chain.nodes[j];
        let hj = z0 * c.sign(nj).value() * (dec.values[nj] - dec.values[chain.m[j - 1]]);
        if hj != h {
            return Err(Error::Contract(format!("gap {hj} at link {j} differs from {h}")));
        }
    }
    Ok(WaveNumber::new(h, dec.l))
}
