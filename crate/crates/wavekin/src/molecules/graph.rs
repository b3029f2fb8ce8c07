//! Molecule representation and construction from couples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{Couple, Diagram, NodeId, Sign};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondLabel {
    /// Leaf pair.
    LP,
    /// Parent–child.
    PC,
}

/// One end of a bond together with the couple node whose wavenumber the
/// bond carries, seen from that atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondEnd {
    pub atom: usize,
    pub node: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bond {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub label: BondLabel,
    /// Parent end of a PC bond.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<[BondEnd; 2]>,
}

impl Bond {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    /// The endpoint opposite to `v` (itself for a loop).
    pub fn other(&self, v: usize) -> usize {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }

    pub fn joins(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Atom {
    /// Display id.
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    /// Coefficient `c_v` with atom charge `k_v = c_v k`.
    #[serde(default)]
    pub charge: i64,
}

/// Directed labelled multigraph; atoms and bonds are addressed by index and
/// bond `i` has `id == i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

impl Molecule {
    /// Build from display ids and directed bonds `(from_id, to_id)`; labels
    /// default to LP.
    pub fn from_edges(ids: &[u32], edges: &[(u32, u32)]) -> Result<Self> {
        let idx = |x: u32| ids.iter().position(|&y| y == x).ok_or_else(|| Error::Data(format!("unknown atom {x}")));
        let atoms = ids.iter().map(|&id| Atom { id, node: None, charge: 0 }).collect();
        let bonds = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                Ok(Bond { id: i, from: idx(a)?, to: idx(b)?, label: BondLabel::LP, parent: None, provenance: None })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Molecule { atoms, bonds };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.bonds.iter().enumerate() {
            if b.id != i || b.from >= self.atoms.len() || b.to >= self.atoms.len() {
                return Err(Error::Data(format!("bond {i} malformed")));
            }
        }
        for v in 0..self.atoms.len() {
            let (o, i) = self.in_out(v);
            if o > 2 || i > 2 {
                return Err(Error::Data(format!("atom {} has in/out degree ({i},{o}) above 2", self.atoms[v].id)));
            }
        }
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.atoms.iter().position(|a| a.id == id)
    }

    /// (out-degree, in-degree); a loop counts once in each.
    pub fn in_out(&self, v: usize) -> (usize, usize) {
        let o = self.bonds.iter().filter(|b| b.from == v).count();
        let i = self.bonds.iter().filter(|b| b.to == v).count();
        (o, i)
    }

    pub fn degree(&self, v: usize) -> usize {
        let (o, i) = self.in_out(v);
        o + i
    }

    /// Bonds at `v` with direction `+1` (outgoing) or `-1`; a loop appears
    /// twice, once each way.
    pub fn incidences(&self, v: usize) -> Vec<(usize, i64)> {
        let mut out = Vec::new();
        for b in &self.bonds {
            if b.from == v {
                out.push((b.id, 1));
            }
            if b.to == v {
                out.push((b.id, -1));
            }
        }
        out
    }

    /// Number of bonds between `a` and `b` (either direction).
    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        self.bonds.iter().filter(|x| x.joins(a, b)).count()
    }

    /// Connected components as sorted atom lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(self.atoms.len(), self.bonds.iter().map(|b| (b.from, b.to)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "schemaVersion": SCHEMA_VERSION, "atoms": self.atoms, "bonds": self.bonds })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let m: Molecule = serde_json::from_value(v.clone())?;
        m.validate()?;
        Ok(m)
    }
}

/// Components of an undirected multigraph given by an edge iterator.
pub fn components_of(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    groups.into_values().collect()
}

/// Molecule of a couple with atoms numbered 1.. in canonical node order
/// (plus-tree preorder, then minus-tree preorder).
pub fn build_molecule(c: &Couple) -> Result<Molecule> {
    build_molecule_labelled(c, &[])
}

/// As [`build_molecule`], with explicit display ids for some nodes.
pub fn build_molecule_labelled(c: &Couple, labels: &[(NodeId, u32)]) -> Result<Molecule> {
    if c.is_trivial() {
        return Err(Error::Domain("the trivial couple has no molecule".into()));
    }
    let [rp, rm] = c.roots();
    let order: Vec<NodeId> = c
        .preorder_from(rp)
        .into_iter()
        .chain(c.preorder_from(rm))
        .filter(|&v| !c.is_leaf(v))
        .collect();
    let mut atom_of = vec![usize::MAX; c.nodes().len()];
    let mut atoms = Vec::with_capacity(order.len());
    for (i, &v) in order.iter().enumerate() {
        atom_of[v] = i;
        let id = labels.iter().find(|x| x.0 == v).map_or(i as u32 + 1, |x| x.1);
        let charge = if v == rp {
            -1
        } else if v == rm {
            1
        } else {
            0
        };
        atoms.push(Atom { id, node: Some(v), charge });
    }
    let mut bonds: Vec<Bond> = Vec::new();
    for &v in &order {
        if let Some(p) = c.node(v).parent {
            let (pa, ca) = (atom_of[p], atom_of[v]);
            let (from, to) = if c.sign(v) == Sign::Minus { (pa, ca) } else { (ca, pa) };
            bonds.push(Bond {
                id: bonds.len(),
                from,
                to,
                label: BondLabel::PC,
                parent: Some(pa),
                provenance: Some([BondEnd { atom: pa, node: v }, BondEnd { atom: ca, node: v }]),
            });
        }
    }
    for (a, b) in c.pairs() {
        match (c.node(a).parent, c.node(b).parent) {
            (Some(pa), Some(pb)) => {
                let (ua, ub) = (atom_of[pa], atom_of[pb]);
                let (from, to, ef, et) = if c.sign(a) == Sign::Minus { (ua, ub, a, b) } else { (ub, ua, b, a) };
                bonds.push(Bond {
                    id: bonds.len(),
                    from,
                    to,
                    label: BondLabel::LP,
                    parent: None,
                    provenance: Some([BondEnd { atom: from, node: ef }, BondEnd { atom: to, node: et }]),
                });
            }
            (Some(pa), None) => atoms[atom_of[pa]].charge += c.sign(a).value(),
            (None, Some(pb)) => atoms[atom_of[pb]].charge += c.sign(b).value(),
            (None, None) => unreachable!("nontrivial couple"),
        }
    }
    let m = Molecule { atoms, bonds };
    m.validate()?;
    Ok(m)
}
