//! Isomorphism-invariant code for small molecules, used to deduplicate
//! couple-derived molecules before expensive sweeps.

use super::graph::Molecule;
use crate::error::{Error, Result};

/// Largest number of relabellings tried after colour refinement.
pub const MAX_CANON_PERMS: usize = 40_320;

/// Lexicographically least directed multiplicity matrix over all atom
/// orders compatible with a colour refinement. Equal codes iff the
/// molecules are isomorphic as directed multigraphs (ids and labels are
/// ignored).
pub fn canonical_form(m: &Molecule) -> Result<Vec<u8>> {
    canonical_form_marked(m, &vec![0; m.atom_count()])
}

/// As [`canonical_form`], with per-atom marks that relabellings must
/// respect.
pub fn canonical_form_marked(m: &Molecule, marks: &[u8]) -> Result<Vec<u8>> {
    let n = m.atom_count();
    if marks.len() != n {
        return Err(Error::Usage(format!("{} marks for {n} atoms", marks.len())));
    }
    let mut adj = vec![vec![0u8; n]; n];
    for b in &m.bonds {
        adj[b.from][b.to] += 1;
    }
    let colours = refine(&adj, marks);
    // atoms grouped by colour, groups in colour order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| colours[v]);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match groups.last_mut() {
            Some(g) if colours[g[0]] == colours[v] => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let perms: usize = groups.iter().map(|g| (1..=g.len()).product::<usize>()).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX);
    if perms > MAX_CANON_PERMS {
        return Err(Error::Resource(format!("{perms} relabellings exceed {MAX_CANON_PERMS}")));
    }
    let mut head: Vec<u8> = Vec::with_capacity(n + 1);
    head.push(n as u8);
    let mut best: Option<Vec<u8>> = None;
    let mut current: Vec<usize> = Vec::with_capacity(n);
    search(&adj, &groups, 0, &mut current, &mut best);
    head.extend(order_marks(&groups, marks));
    head.extend(best.unwrap_or_default());
    Ok(head)
}

fn search(adj: &[Vec<u8>], groups: &[Vec<usize>], gi: usize, cur: &mut Vec<usize>, best: &mut Option<Vec<u8>>) {
    if gi == groups.len() {
        let code: Vec<u8> = cur.iter().flat_map(|&a| cur.iter().map(move |&b| adj[a][b])).collect();
        if best.as_ref().is_none_or(|b| code < *b) {
            *best = Some(code);
        }
        return;
    }
    permute(adj, groups, gi, &mut groups[gi].clone(), 0, cur, best);
}

fn permute(
    adj: &[Vec<u8>],
    groups: &[Vec<usize>],
    gi: usize,
    g: &mut Vec<usize>,
    i: usize,
    cur: &mut Vec<usize>,
    best: &mut Option<Vec<u8>>,
) {
    if i == g.len() {
        let len = cur.len();
        cur.extend_from_slice(g);
        search(adj, groups, gi + 1, cur, best);
        cur.truncate(len);
        return;
    }
    for j in i..g.len() {
        g.swap(i, j);
        permute(adj, groups, gi, g, i + 1, cur, best);
        g.swap(i, j);
    }
}

/// Colour refinement on (out, in, loop) profiles; returns dense colours
/// that are invariant under relabelling.
fn refine(adj: &[Vec<u8>], marks: &[u8]) -> Vec<usize> {
    let n = adj.len();
    let mut col: Vec<usize> = marks.iter().map(|&x| x as usize).collect();
    for _ in 0..=n {
        let sigs: Vec<(usize, Vec<(usize, u8, u8)>, u8)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(usize, u8, u8)> =
                    (0..n).filter(|&u| u != v && adj[v][u] + adj[u][v] > 0).map(|u| (col[u], adj[v][u], adj[u][v])).collect();
                nb.sort_unstable();
                (col[v], nb, adj[v][v])
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort();
        uniq.dedup();
        let next: Vec<usize> = sigs.iter().map(|s| uniq.binary_search(s).expect("present")).collect();
        if next == col {
            break;
        }
        col = next;
    }
    col
}

fn order_marks(groups: &[Vec<usize>], marks: &[u8]) -> Vec<u8> {
    groups.iter().flat_map(|g| g.iter().map(|&v| marks[v])).collect()
}
