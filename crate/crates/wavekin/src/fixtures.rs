//! Reference diagrams used by tests, the CLI and the acceptance suite.

use crate::combinatorics::{Couple, NodeId, Sign, SignedTernaryTree};
use crate::molecules::Molecule;

/// An order-5 couple (plus tree of order 3, minus tree of order 2) with six
/// leaf pairs, and the atom label of each branching node.
///
/// Plus root `1` has children `(3, 4, f)`, `3` has `(a, b, c)`, `4` has
/// `(a, d, e)`; minus root `2` has `(f, b, 5)` and `5` has `(d, e, c)`.
/// Equal letters are paired.
pub fn five_atom_couple() -> (Couple, Vec<(NodeId, u32)>) {
    let plus = SignedTernaryTree::from_code("3300030000", Sign::Plus).expect("valid code");
    let minus = SignedTernaryTree::from_code("3003000", Sign::Minus).expect("valid code");
    let pairs = [(2, 6), (3, 12), (4, 16), (7, 14), (8, 15), (9, 11)];
    let c = Couple::from_trees(&plus, &minus, &pairs).expect("valid couple");
    (c, vec![(0, 1), (1, 3), (5, 4), (10, 2), (13, 5)])
}

/// A ladder of `2r + 1` opposite double bonds joined by single bonds, with
/// one extra atom per pair of rungs, closed by a single bond between the two
/// ends. The ends are the only degree-3 atoms.
///
/// Ladder atoms are `1..=4r+2` with double bonds `(2i-1, 2i)` and single
/// bonds `2i -> 2i+1`; extra atom `g_j = 4r+2+j` carries
/// `4j-1 -> g_j -> 4j-2` and `4j+1 -> g_j -> 4j`; the closing bond is
/// `1 -> 4r+2`. For `r = 2` this has 12 atoms and reduces with
/// `(m3, m2, m0, m1) = (3, 6, 2, 3)`.
pub fn double_bond_ladder_molecule(r: u32) -> Molecule {
    assert!(r >= 1, "at least one extra atom");
    let top = 4 * r + 2;
    let ids: Vec<u32> = (1..=top + r).collect();
    let mut edges = Vec::new();
    for i in 1..=2 * r + 1 {
        edges.push((2 * i - 1, 2 * i));
        edges.push((2 * i, 2 * i - 1));
    }
    for i in 1..=2 * r {
        edges.push((2 * i, 2 * i + 1));
    }
    for j in 1..=r {
        let g = top + j;
        edges.extend([(4 * j - 1, g), (g, 4 * j - 2), (4 * j + 1, g), (g, 4 * j)]);
    }
    edges.push((1, top));
    Molecule::from_edges(&ids, &edges).expect("valid ladder")
}
