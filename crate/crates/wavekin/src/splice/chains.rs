//! Double bonds and maximal chain-like objects of a molecule.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::combinatorics::NodeId;
use crate::error::{Error, Result};
use crate::lattice::WaveNumber;
use crate::molecules::{BondLabel, Molecule, MoleculeDecoration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DoubleBondKind {
    /// One leaf-pair and one parent-child bond.
    CL,
    /// Two leaf-pair bonds.
    CN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Orientation {
    Opposite,
    Same,
}

/// Couple nodes realising a double bond. For CL, `parent_node` has child
/// `child_node`, and leaf `parent_leaf` of the former is paired with leaf
/// `child_leaf` of the latter. For CN the two leaf pairs are listed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Witness {
    CL { parent_node: NodeId, child_node: NodeId, parent_leaf: NodeId, child_leaf: NodeId },
    CN { pairs: [(NodeId, NodeId); 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DoubleBondInfo {
    /// Atom indices, `atoms.0 < atoms.1`.
    pub atoms: (usize, usize),
    pub bonds: [usize; 2],
    pub kind: DoubleBondKind,
    pub orientation: Orientation,
    /// Present when the molecule carries couple provenance.
    pub couple_witness: Option<Witness>,
}

impl DoubleBondInfo {
    pub fn other(&self, v: usize) -> usize {
        if self.atoms.0 == v {
            self.atoms.1
        } else {
            self.atoms.0
        }
    }

    /// The admissible node of a CL double bond (its child end).
    pub fn admissible_node(&self) -> Option<NodeId> {
        match self.couple_witness {
            Some(Witness::CL { child_node, .. }) => Some(child_node),
            _ => None,
        }
    }
}

/// Every pair of atoms joined by exactly two bonds.
pub fn classify_double_bonds(m: &Molecule) -> Vec<DoubleBondInfo> {
    let n = m.atom_count();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let ids: Vec<usize> = m.bonds.iter().filter(|x| x.joins(a, b)).map(|x| x.id).collect();
            if ids.len() != 2 {
                continue;
            }
            let (b1, b2) = (&m.bonds[ids[0]], &m.bonds[ids[1]]);
            let orientation = if b1.from == b2.from { Orientation::Same } else { Orientation::Opposite };
            let pcs = [b1, b2].iter().filter(|x| x.label == BondLabel::PC).count();
            let kind = if pcs == 0 { DoubleBondKind::CN } else { DoubleBondKind::CL };
            let couple_witness = witness(m, [b1.id, b2.id], kind);
            out.push(DoubleBondInfo { atoms: (a, b), bonds: [ids[0], ids[1]], kind, orientation, couple_witness });
        }
    }
    out
}

fn witness(m: &Molecule, ids: [usize; 2], kind: DoubleBondKind) -> Option<Witness> {
    let provs: Vec<_> = ids.iter().map(|&i| m.bonds[i].provenance).collect::<Option<Vec<_>>>()?;
    match kind {
        DoubleBondKind::CN => {
            Some(Witness::CN { pairs: [(provs[0][0].node, provs[0][1].node), (provs[1][0].node, provs[1][1].node)] })
        }
        DoubleBondKind::CL => {
            let (pc, lp) = if m.bonds[ids[0]].label == BondLabel::PC { (0, 1) } else { (1, 0) };
            let pa = m.bonds[ids[pc]].parent?;
            let child_node = provs[pc][0].node;
            let parent_node = m.atoms[pa].node?;
            let ends = provs[lp];
            let (parent_leaf, child_leaf) =
                if ends[0].atom == pa { (ends[0].node, ends[1].node) } else { (ends[1].node, ends[0].node) };
            Some(Witness::CL { parent_node, child_node, parent_leaf, child_leaf })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ChainKind {
    Chain,
    Hyperchain,
    PseudoHyperchain,
}

impl ChainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainKind::Chain => "chain",
            ChainKind::Hyperchain => "hyperchain",
            ChainKind::PseudoHyperchain => "pseudoHyperchain",
        }
    }
}

/// A maximal chain `(v_0, ..., v_q)` of atom indices with `q >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainObject {
    pub atoms: Vec<usize>,
    /// `double_bonds[i]` joins `atoms[i]` and `atoms[i + 1]`.
    pub double_bonds: Vec<DoubleBondInfo>,
    pub kind: ChainKind,
    /// Common single-bond neighbour of the ends of a pseudo-hyperchain.
    pub apex: Option<usize>,
    #[serde(rename = "CLOnly")]
    pub cl_only: bool,
    pub negative: bool,
    pub irregular: bool,
    pub maximal: bool,
}

impl ChainObject {
    pub fn q(&self) -> usize {
        self.atoms.len() - 1
    }

    pub fn has_cn(&self) -> bool {
        self.double_bonds.iter().any(|d| d.kind == DoubleBondKind::CN)
    }

    /// Admissible couple nodes of the chain, in chain order.
    pub fn admissible_nodes(&self) -> Vec<NodeId> {
        self.double_bonds.iter().filter_map(|d| d.admissible_node()).collect()
    }

    pub fn ends(&self) -> (usize, usize) {
        (self.atoms[0], *self.atoms.last().expect("nonempty"))
    }
}

/// Which double bonds may link consecutive chain atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainScope {
    All,
    /// Only double bonds whose bonds point opposite ways.
    Negative,
}

/// Maximal chains of `m` built from all double bonds.
pub fn classify_chain_objects(m: &Molecule) -> Vec<ChainObject> {
    classify_chain_objects_in(m, ChainScope::All)
}

/// The disjoint collection of maximal chain-like objects for `scope`.
pub fn classify_chain_objects_in(m: &Molecule, scope: ChainScope) -> Vec<ChainObject> {
    let dbs: Vec<DoubleBondInfo> = classify_double_bonds(m)
        .into_iter()
        .filter(|d| scope == ChainScope::All || d.orientation == Orientation::Opposite)
        .collect();
    let n = m.atom_count();
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, d) in dbs.iter().enumerate() {
        inc[d.atoms.0].push(i);
        inc[d.atoms.1].push(i);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || inc[start].is_empty() {
            continue;
        }
        // collect the component, then walk it from an end (or its lowest atom
        // when the component closes up)
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if comp.insert(v) {
                stack.extend(inc[v].iter().map(|&i| dbs[i].other(v)));
            }
        }
        for &v in &comp {
            seen[v] = true;
        }
        let ends: Vec<usize> = comp.iter().copied().filter(|&v| inc[v].len() == 1).collect();
        let first = pick_start(m, &ends, &dbs, &inc).unwrap_or(*comp.iter().next().expect("nonempty"));
        let mut atoms = vec![first];
        let mut bonds = Vec::new();
        let mut used = BTreeSet::new();
        let mut cur = first;
        while let Some(&i) = inc[cur].iter().find(|&&i| !used.contains(&i)) {
            used.insert(i);
            bonds.push(dbs[i].clone());
            cur = dbs[i].other(cur);
            if cur == first {
                break;
            }
            atoms.push(cur);
        }
        out.push(finish(m, atoms, bonds));
    }
    out
}

/// Prefer the end whose atom is the parent in its double bond; otherwise
/// the end with the smaller display id.
fn pick_start(m: &Molecule, ends: &[usize], dbs: &[DoubleBondInfo], inc: &[Vec<usize>]) -> Option<usize> {
    let is_top = |v: usize| match dbs[inc[v][0]].couple_witness {
        Some(Witness::CL { parent_node, .. }) => m.atoms[v].node == Some(parent_node),
        _ => false,
    };
    let tops: Vec<usize> = ends.iter().copied().filter(|&v| is_top(v)).collect();
    let pool = if tops.len() == 1 { tops } else { ends.to_vec() };
    pool.into_iter().min_by_key(|&v| m.atoms[v].id)
}

fn finish(m: &Molecule, atoms: Vec<usize>, double_bonds: Vec<DoubleBondInfo>) -> ChainObject {
    let (v0, vq) = (atoms[0], *atoms.last().expect("nonempty"));
    let inside: BTreeSet<usize> = atoms.iter().copied().collect();
    let mut kind = ChainKind::Chain;
    let mut apex = None;
    if v0 != vq && m.multiplicity(v0, vq) == 1 {
        kind = ChainKind::Hyperchain;
    } else if v0 != vq {
        apex = (0..m.atom_count())
            .filter(|v| !inside.contains(v))
            .find(|&v| m.multiplicity(v0, v) == 1 && m.multiplicity(vq, v) == 1);
        if apex.is_some() {
            kind = ChainKind::PseudoHyperchain;
        }
    }
    let cl_only = double_bonds.iter().all(|d| d.kind == DoubleBondKind::CL);
    let negative = double_bonds.iter().all(|d| d.orientation == Orientation::Opposite);
    ChainObject { atoms, double_bonds, kind, apex, cl_only, negative, irregular: cl_only && negative, maximal: true }
}

/// Small/large gap classification with threshold `constant * T^(-1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GapClass {
    pub h: WaveNumber,
    pub small: bool,
    pub threshold: f64,
}

impl GapClass {
    pub fn new(h: WaveNumber, t_big: f64, constant: f64) -> Self {
        let threshold = constant / t_big.sqrt();
        GapClass { h, small: h.value().abs() <= threshold, threshold }
    }

    pub fn label(&self) -> &'static str {
        if self.small {
            "SG"
        } else {
            "LG"
        }
    }
}

/// Gap of each double bond along a negative chain, read in chain order:
/// value of the bond pointing forward minus the one pointing back.
pub fn chain_gaps(m: &Molecule, chain: &ChainObject, md: &MoleculeDecoration) -> Result<Vec<i64>> {
    chain
        .double_bonds
        .iter()
        .zip(chain.atoms.windows(2))
        .map(|(d, w)| {
            if d.orientation != Orientation::Opposite {
                return Err(Error::Domain("gap is defined for opposite double bonds only".into()));
            }
            let fwd = d.bonds.iter().find(|&&b| m.bonds[b].from == w[0]).expect("opposite bonds");
            let back = d.bonds.iter().find(|&&b| m.bonds[b].from == w[1]).expect("opposite bonds");
            Ok(md.bond_values[*fwd] - md.bond_values[*back])
        })
        .collect()
}

/// The common gap of a decorated negative chain, classified.
pub fn chain_gap(
    m: &Molecule,
    chain: &ChainObject,
    md: &MoleculeDecoration,
    t_big: f64,
    constant: f64,
) -> Result<GapClass> {
    let gaps = chain_gaps(m, chain, md)?;
    if gaps.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Contract(format!("gaps differ along the chain: {gaps:?}")));
    }
    Ok(GapClass::new(WaveNumber::new(gaps[0], md.l), t_big, constant))
}
