//! Molecule decorations: transfer from couples and exact counting.

use serde::Serialize;

use super::graph::{BondLabel, Molecule};
use crate::combinatorics::{check_couple_decoration, Couple, Decoration, Diagram};
use crate::error::{Error, Result};
use crate::lattice::Dispersion;

/// Bond values and atom data (`k_v`, `beta_v`) over `(1/l)Z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MoleculeDecoration {
    pub l: i64,
    pub bond_values: Vec<i64>,
    pub atom_k: Vec<i64>,
    pub beta: Vec<f64>,
}

/// `Gamma_v = sum over incident bonds of d * omega(k_bond)`.
pub fn gamma(m: &Molecule, values: &[i64], disp: &Dispersion) -> Vec<f64> {
    (0..m.atom_count())
        .map(|v| m.incidences(v).iter().map(|&(b, d)| d as f64 * disp.w(values[b])).sum())
        .collect()
}

/// Signed bond sum at each atom, `sum d * k_bond`.
pub fn atom_sums(m: &Molecule, values: &[i64]) -> Vec<i64> {
    (0..m.atom_count()).map(|v| m.incidences(v).iter().map(|&(b, d)| d * values[b]).sum()).collect()
}

/// Carry a couple decoration to its molecule; `beta` is set to `Gamma`.
pub fn decoration_transfer(c: &Couple, m: &Molecule, dec: &Decoration, sigma: f64) -> Result<MoleculeDecoration> {
    check_couple_decoration(c, dec)?;
    let k = dec.values[c.roots()[0]];
    let mut bond_values = Vec::with_capacity(m.bond_count());
    for b in &m.bonds {
        let prov = b.provenance.ok_or_else(|| Error::Usage(format!("bond {} lacks provenance", b.id)))?;
        let (x, y) = (dec.values[prov[0].node], dec.values[prov[1].node]);
        if x != y {
            return Err(Error::Contract(format!("bond {} ends disagree", b.id)));
        }
        bond_values.push(x);
    }
    let atom_k: Vec<i64> = m.atoms.iter().map(|a| a.charge * k).collect();
    if atom_sums(m, &bond_values) != atom_k {
        return Err(Error::Contract("transferred decoration violates atom conservation".into()));
    }
    let beta = gamma(m, &bond_values, &Dispersion::new(sigma, dec.l));
    Ok(MoleculeDecoration { l: dec.l, bond_values, atom_k, beta })
}

/// Inverse of [`decoration_transfer`].
pub fn decoration_from_molecule(c: &Couple, m: &Molecule, md: &MoleculeDecoration, k: i64) -> Result<Decoration> {
    let mut values = vec![i64::MIN; c.nodes().len()];
    for b in &m.bonds {
        let prov = b.provenance.ok_or_else(|| Error::Usage(format!("bond {} lacks provenance", b.id)))?;
        for end in prov {
            values[end.node] = md.bond_values[b.id];
            if b.label == BondLabel::LP {
                if let Some(p) = c.partner(end.node) {
                    values[p] = md.bond_values[b.id];
                }
            }
        }
    }
    for r in c.roots() {
        values[r] = k;
        if c.is_leaf(r) {
            values[c.partner(r).expect("paired")] = k;
        }
    }
    if values.contains(&i64::MIN) {
        return Err(Error::Contract("molecule decoration does not cover the couple".into()));
    }
    let dec = Decoration { l: md.l, values };
    check_couple_decoration(c, &dec)?;
    Ok(dec)
}

/// Resonance window applied per atom.
#[derive(Clone, Copy, Debug)]
pub struct GammaWindow {
    pub t_big: f64,
    /// `|Gamma - beta| < 1/T` when true, `<= 1/T` otherwise.
    pub strict: bool,
}

/// Data for [`count_molecule_decorations`].
#[derive(Clone, Debug)]
pub struct MoleculeCountSpec {
    pub k: i64,
    pub l: i64,
    pub sigma: f64,
    /// Box center `k0` per bond: `|k_bond - k0| <= 1`.
    pub centers: Vec<f64>,
    /// Target `beta_v` per atom.
    pub beta: Vec<f64>,
    pub window: Option<GammaWindow>,
    /// Reject decorations with a degenerate atom.
    pub nondegenerate: bool,
}

/// Limit on free bonds (cycle rank) for counting.
pub const MAX_FREE_BONDS: usize = 5;
/// Limit on the enumerated search space.
pub const MAX_SEARCH: f64 = 2e10;

/// Exact number of decorations with atom charges `c_v k`, boxed bonds and
/// the optional windows and non-degeneracy filter.
pub fn count_molecule_decorations(m: &Molecule, spec: &MoleculeCountSpec) -> Result<u64> {
    let nb = m.bond_count();
    let na = m.atom_count();
    if spec.centers.len() != nb || spec.beta.len() != na {
        return Err(Error::Usage("need one center per bond and one beta per atom".into()));
    }
    let l = spec.l;
    let atom_k: Vec<i64> = m.atoms.iter().map(|a| a.charge * spec.k).collect();
    let ranges: Vec<(i64, i64)> = spec
        .centers
        .iter()
        .map(|&c| (((c - 1.0) * l as f64 - 1e-9).ceil() as i64, ((c + 1.0) * l as f64 + 1e-9).floor() as i64))
        .collect();
    // spanning forest by BFS in atom order
    let mut in_tree = vec![false; nb];
    let mut parent_bond: Vec<Option<usize>> = vec![None; na];
    let mut seen = vec![false; na];
    let mut order = Vec::with_capacity(na);
    for comp in m.components() {
        if comp.iter().map(|&v| atom_k[v]).sum::<i64>() != 0 {
            return Ok(0);
        }
        let root = comp[0];
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (b, _) in m.incidences(v) {
                let u = m.bonds[b].other(v);
                if !seen[u] {
                    seen[u] = true;
                    in_tree[b] = true;
                    parent_bond[u] = Some(b);
                    queue.push_back(u);
                }
            }
        }
    }
    let free: Vec<usize> = (0..nb).filter(|&b| !in_tree[b]).collect();
    if free.len() > MAX_FREE_BONDS {
        return Err(Error::Resource(format!("{} free bonds exceed the guard {MAX_FREE_BONDS}", free.len())));
    }
    let space: f64 = free.iter().map(|&b| (ranges[b].1 - ranges[b].0 + 1).max(0) as f64).product();
    if space > MAX_SEARCH {
        return Err(Error::Resource(format!("search space {space:.3e} exceeds guard")));
    }
    if free.iter().any(|&b| ranges[b].0 > ranges[b].1) {
        return Ok(0);
    }
    let inc: Vec<Vec<(usize, i64)>> = (0..na).map(|v| m.incidences(v)).collect();
    let peel: Vec<(usize, usize, i64)> = order
        .iter()
        .rev()
        .filter_map(|&v| {
            parent_bond[v].map(|b| {
                let d = inc[v].iter().find(|x| x.0 == b).expect("incident").1;
                (v, b, d)
            })
        })
        .collect();
    let disp = Dispersion::new(spec.sigma, l);
    let mut values = vec![0i64; nb];
    let mut vals: Vec<i64> = free.iter().map(|&b| ranges[b].0).collect();
    let mut count = 0u64;
    'outer: loop {
        for (j, &b) in free.iter().enumerate() {
            values[b] = vals[j];
        }
        let mut ok = true;
        for &(v, b, d) in &peel {
            let rest: i64 = inc[v].iter().filter(|x| x.0 != b).map(|&(x, dx)| dx * values[x]).sum();
            let val = d * (atom_k[v] - rest);
            if val < ranges[b].0 || val > ranges[b].1 {
                ok = false;
                break;
            }
            values[b] = val;
        }
        if ok {
            if let Some(w) = spec.window {
                let tol = 1.0 / w.t_big;
                for v in 0..na {
                    let g: f64 = inc[v].iter().map(|&(b, d)| d as f64 * disp.w(values[b])).sum();
                    let dev = (g - spec.beta[v]).abs();
                    if if w.strict { dev >= tol } else { dev > tol } {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok && spec.nondegenerate {
            ok = !(0..na).any(|v| {
                inc[v].iter().any(|&(b1, d1)| {
                    !m.bonds[b1].is_loop()
                        && inc[v].iter().any(|&(b2, d2)| {
                            b1 != b2 && d1 != d2 && !m.bonds[b2].is_loop() && values[b1] == values[b2]
                        })
                })
            });
        }
        if ok {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == free.len() {
                break 'outer;
            }
            let b = free[j];
            if vals[j] < ranges[b].1 {
                vals[j] += 1;
                break;
            }
            vals[j] = ranges[b].0;
            j += 1;
        }
    }
    Ok(count)
}
