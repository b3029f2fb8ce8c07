//! Structural invariants: Euler characteristic, bridges, multiple bonds,
//! degeneracy and forbidden atomic groups.

use std::collections::BTreeMap;

use serde::Serialize;

use super::decor::MoleculeDecoration;
use super::graph::{components_of, Molecule};
use crate::combinatorics::{Couple, Diagram};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultiBond {
    pub atoms: (usize, usize),
    pub bonds: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DegeneracyReport {
    pub degenerate_atoms: Vec<usize>,
    pub fully_degenerate: Vec<usize>,
}

/// A set of atoms with every bond between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AtomicGroup {
    pub atoms: Vec<usize>,
    pub internal_bonds: Vec<usize>,
    pub external_bonds: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StructureReport {
    pub atoms: usize,
    pub bonds: usize,
    pub components: usize,
    pub chi: i64,
    pub degree_histogram: BTreeMap<usize, usize>,
    pub bridges: Vec<usize>,
    pub self_loops: Vec<usize>,
    /// Atom pairs joined by two or more bonds.
    pub multi_bonds: Vec<MultiBond>,
    pub connected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<DegeneracyReport>,
}

pub fn structure_report(m: &Molecule, dec: Option<&MoleculeDecoration>) -> StructureReport {
    let v = m.atom_count();
    let e = m.bond_count();
    let comps = m.components();
    let mut hist = BTreeMap::new();
    for a in 0..v {
        *hist.entry(m.degree(a)).or_insert(0) += 1;
    }
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for b in &m.bonds {
        if !b.is_loop() {
            groups.entry((b.from.min(b.to), b.from.max(b.to))).or_default().push(b.id);
        }
    }
    let multi_bonds = groups
        .into_iter()
        .filter(|(_, b)| b.len() >= 2)
        .map(|(atoms, bonds)| MultiBond { atoms, bonds })
        .collect();
    StructureReport {
        atoms: v,
        bonds: e,
        components: comps.len(),
        chi: e as i64 - v as i64 + comps.len() as i64,
        degree_histogram: hist,
        bridges: bridges(m),
        self_loops: m.bonds.iter().filter(|b| b.is_loop()).map(|b| b.id).collect(),
        multi_bonds,
        connected: comps.len() <= 1,
        degeneracy: dec.map(|d| degeneracy(m, d)),
    }
}

/// Bonds whose removal increases the number of components.
pub fn bridges(m: &Molecule) -> Vec<usize> {
    let base = m.components().len();
    m.bonds
        .iter()
        .filter(|b| !b.is_loop())
        .filter(|b| {
            let rest = m.bonds.iter().filter(|x| x.id != b.id).map(|x| (x.from, x.to));
            components_of(m.atom_count(), rest).len() > base
        })
        .map(|b| b.id)
        .collect()
}

pub fn atomic_group(m: &Molecule, atoms: &[usize]) -> AtomicGroup {
    let inside = |x: usize| atoms.contains(&x);
    let mut internal = Vec::new();
    let mut external = Vec::new();
    for b in &m.bonds {
        match (inside(b.from), inside(b.to)) {
            (true, true) => internal.push(b.id),
            (true, false) | (false, true) => external.push(b.id),
            _ => {}
        }
    }
    let mut a = atoms.to_vec();
    a.sort_unstable();
    AtomicGroup { atoms: a, internal_bonds: internal, external_bonds: external }
}

/// An atom is degenerate when two distinct bonds of opposite direction at it
/// carry equal values, fully degenerate when all incident bonds agree.
pub fn degeneracy(m: &Molecule, dec: &MoleculeDecoration) -> DegeneracyReport {
    let mut rep = DegeneracyReport::default();
    for v in 0..m.atom_count() {
        let inc: Vec<(usize, i64)> = m.incidences(v).into_iter().filter(|(b, _)| !m.bonds[*b].is_loop()).collect();
        let degenerate = inc.iter().any(|&(b1, d1)| {
            inc.iter().any(|&(b2, d2)| b1 != b2 && d1 != d2 && dec.bond_values[b1] == dec.bond_values[b2])
        });
        let all = m.incidences(v);
        let full = !all.is_empty() && all.iter().all(|&(b, _)| dec.bond_values[b] == dec.bond_values[all[0].0]);
        if degenerate {
            rep.degenerate_atoms.push(v);
        }
        if full {
            rep.fully_degenerate.push(v);
        }
    }
    rep
}

/// Returns true when neither forbidden atomic group embeds: (a) a triangle
/// of single bonds whose atoms are each double-bonded to distinct outside
/// atoms; (b) a triangle with one triple and two single bonds whose
/// remaining atom is double-bonded to an outside atom.
pub fn forbidden_triangle_check(m: &Molecule) -> bool {
    find_forbidden_triangle(m).is_none()
}

/// First embedding found, as (pattern letter, triangle atoms).
pub fn find_forbidden_triangle(m: &Molecule) -> Option<(char, [usize; 3])> {
    let n = m.atom_count();
    let mut mult = vec![vec![0usize; n]; n];
    for b in &m.bonds {
        if !b.is_loop() {
            mult[b.from][b.to] += 1;
            mult[b.to][b.from] += 1;
        }
    }
    let doubles = |x: usize, avoid: &[usize]| -> Vec<usize> {
        (0..n).filter(|&o| !avoid.contains(&o) && mult[x][o] == 2).collect()
    };
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                let tri = [x, y, z];
                if x < y && y < z && mult[x][y] == 1 && mult[y][z] == 1 && mult[z][x] == 1 {
                    let (dx, dy, dz) = (doubles(x, &tri), doubles(y, &tri), doubles(z, &tri));
                    let distinct = dx.iter().any(|&a| {
                        dy.iter().any(|&b| b != a && dz.iter().any(|&c| c != a && c != b))
                    });
                    if distinct {
                        return Some(('a', tri));
                    }
                }
                if mult[x][y] == 1 && mult[y][z] == 3 && mult[z][x] == 1 && !doubles(x, &tri).is_empty() {
                    return Some(('b', tri));
                }
            }
        }
    }
    None
}

/// Bond values of a couple molecule as integer combinations of the leaf-pair
/// values, which are free. Bond `i` gets `forms[i]`.
pub fn bond_value_forms(c: &Couple, m: &Molecule) -> Result<Vec<Vec<i64>>> {
    let pairs = c.pairs();
    let nv = pairs.len();
    let mut forms = vec![vec![0i64; nv]; c.nodes().len()];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        forms[a][i] = 1;
        forms[b][i] = 1;
    }
    for r in c.roots() {
        let mut post = c.preorder_from(r);
        post.reverse();
        for v in post {
            if let Some(ch) = c.node(v).children {
                let zv = c.sign(v).value();
                let mut f = vec![0i64; nv];
                for x in ch {
                    let zx = c.sign(x).value();
                    for (t, &y) in f.iter_mut().zip(&forms[x]) {
                        *t += zv * zx * y;
                    }
                }
                forms[v] = f;
            }
        }
    }
    m.bonds
        .iter()
        .map(|b| {
            let prov = b.provenance.ok_or_else(|| Error::Usage(format!("bond {} lacks provenance", b.id)))?;
            Ok(forms[prov[0].node].clone())
        })
        .collect()
}

/// Atoms degenerate under every decoration: two non-loop bonds of opposite
/// direction whose values agree identically.
pub fn structurally_degenerate_atoms(c: &Couple, m: &Molecule) -> Result<Vec<usize>> {
    let forms = bond_value_forms(c, m)?;
    Ok((0..m.atom_count())
        .filter(|&v| {
            let inc: Vec<(usize, i64)> = m.incidences(v).into_iter().filter(|(b, _)| !m.bonds[*b].is_loop()).collect();
            inc.iter().any(|&(b1, d1)| inc.iter().any(|&(b2, d2)| b1 != b2 && d1 != d2 && forms[b1] == forms[b2]))
        })
        .collect())
}
