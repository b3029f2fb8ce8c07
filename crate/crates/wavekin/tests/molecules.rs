use std::collections::BTreeSet;

use wavekin::combinatorics::*;
use wavekin::fixtures::five_atom_couple;
use wavekin::molecules::*;
use wavekin::{Dispersion, WaveNumber};

fn edge_set(m: &Molecule) -> BTreeSet<(u32, u32)> {
    m.bonds.iter().map(|b| (m.atoms[b.from].id, m.atoms[b.to].id)).collect()
}

#[test]
fn five_atom_couple_molecule_edges() {
    let (c, labels) = five_atom_couple();
    let m = build_molecule_labelled(&c, &labels).unwrap();
    let want: BTreeSet<(u32, u32)> =
        [(3, 2), (2, 1), (3, 1), (1, 4), (4, 5), (5, 4), (5, 3), (4, 3), (2, 5)].into_iter().collect();
    assert_eq!(m.atom_count(), 5);
    assert_eq!(m.bond_count(), 9);
    assert_eq!(edge_set(&m), want);
    let pc: BTreeSet<(u32, u32)> = m
        .bonds
        .iter()
        .filter(|b| b.label == BondLabel::PC)
        .map(|b| (m.atoms[b.from].id, m.atoms[b.to].id))
        .collect();
    assert_eq!(pc, [(3, 1), (1, 4), (2, 5)].into_iter().collect());
    let r = structure_report(&m, None);
    assert_eq!(r.chi, 5);
    assert!(r.connected);
    assert!(forbidden_triangle_check(&m));
}

#[test]
fn order_one_molecule_is_a_loop() {
    for c in enumerate_couples(1).unwrap() {
        let m = build_molecule(&c).unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.degree(0), 2);
        assert!(m.bonds[0].is_loop());
    }
    assert!(matches!(build_molecule(&Couple::trivial()), Err(wavekin::Error::Domain(_))));
}

fn check_correspondence(c: &Couple) {
    let n = c.order();
    let m = build_molecule(c).unwrap();
    assert_eq!(m.atom_count(), n);
    assert_eq!(m.bond_count(), 2 * n - 1);
    let r = structure_report(&m, None);
    assert!(r.connected);
    let deg: Vec<usize> = (0..n).map(|v| m.degree(v)).collect();
    let threes = deg.iter().filter(|&&d| d == 3).count();
    let twos = deg.iter().filter(|&&d| d == 2).count();
    let fours = deg.iter().filter(|&&d| d == 4).count();
    assert!((threes == 2 && twos == 0) || (twos == 1 && threes == 0), "{deg:?}");
    assert_eq!(fours + threes + twos, n);
    // LP bonds point from the atom of the minus-sign leaf to the plus-sign one
    for b in &m.bonds {
        let p = b.provenance.unwrap();
        match b.label {
            BondLabel::LP => {
                assert_eq!(c.sign(p[0].node), Sign::Minus);
                assert_eq!(c.sign(p[1].node), Sign::Plus);
                assert_eq!(p[0].atom, b.from);
            }
            BondLabel::PC => assert_eq!(p[0].node, p[1].node),
        }
    }
}

#[test]
fn molecule_correspondence_up_to_order_four() {
    for n in 1..=4 {
        for c in enumerate_couples(n).unwrap() {
            check_correspondence(&c);
        }
    }
}

#[test]
fn bridges_and_degeneracy() {
    let m = Molecule::from_edges(&[1, 2], &[(1, 2)]).unwrap();
    assert_eq!(bridges(&m), vec![0]);
    let m = Molecule::from_edges(&[1, 2, 3], &[(1, 2), (2, 1), (2, 3)]).unwrap();
    assert_eq!(bridges(&m), vec![2]);
    let dec = MoleculeDecoration { l: 4, bond_values: vec![3, 3, 1], atom_k: vec![0, 0, 0], beta: vec![0.0; 3] };
    let rep = degeneracy(&m, &dec);
    assert_eq!(rep.degenerate_atoms, vec![0, 1]);
    assert_eq!(rep.fully_degenerate, vec![0, 2]);
    let r = structure_report(&m, Some(&dec));
    assert_eq!(r.multi_bonds.len(), 1);
    let g = atomic_group(&m, &[0, 1]);
    assert_eq!((g.internal_bonds.len(), g.external_bonds.len()), (2, 1));
}

#[test]
fn forbidden_patterns_are_detected() {
    // triangle 1-2-3 of single bonds, each atom double-bonded outward
    let a = Molecule::from_edges(
        &[1, 2, 3, 4, 5, 6],
        &[(1, 2), (2, 3), (3, 1), (1, 4), (4, 1), (2, 5), (5, 2), (3, 6), (6, 3)],
    )
    .unwrap();
    assert!(!forbidden_triangle_check(&a));
    // single, triple, single, plus a double bond out of the first atom
    let b = Molecule::from_edges(&[1, 2, 3, 4], &[(1, 2), (2, 3), (3, 2), (2, 3), (3, 1), (1, 4), (4, 1)]).unwrap();
    assert_eq!(find_forbidden_triangle(&b).map(|x| x.0), Some('b'));
    let ok = Molecule::from_edges(&[1, 2, 3], &[(1, 2), (2, 3), (3, 1)]).unwrap();
    assert!(forbidden_triangle_check(&ok));
}

/// Couple-side count: decorations whose leaf and internal non-root values
/// lie in `[-w, w]`, optionally filtered by the resonance windows.
fn couple_side(c: &Couple, k: i64, l: i64, w: i64, window: Option<f64>) -> u64 {
    let m = build_molecule(c).unwrap();
    let disp = Dispersion::new(2.0, l);
    let [rp, rm] = c.roots();
    let mut n = 0;
    for_each_couple_decoration(c, k, l, &LeafBounds::window(w), |vals| {
        let inner_ok =
            c.branching_nodes().iter().all(|&v| v == rp || v == rm || vals[v].abs() <= w);
        if !inner_ok {
            return;
        }
        if let Some(t) = window {
            let dec = Decoration { l, values: vals.to_vec() };
            let md = decoration_transfer(c, &m, &dec, 2.0).unwrap();
            let g = gamma(&m, &md.bond_values, &disp);
            if g.iter().any(|x| x.abs() > 1.0 / t) {
                return;
            }
        }
        n += 1;
    })
    .unwrap();
    n
}

#[test]
fn transfer_is_a_bijection_on_small_couples() {
    let l = 8;
    for n in 1..=2 {
        for c in enumerate_couples(n).unwrap() {
            let m = build_molecule(&c).unwrap();
            for k in [0, 3] {
                for window in [None, Some(4.0)] {
                    let spec = MoleculeCountSpec {
                        k,
                        l,
                        sigma: 2.0,
                        centers: vec![0.0; m.bond_count()],
                        beta: vec![0.0; m.atom_count()],
                        window: window.map(|t| GammaWindow { t_big: t, strict: false }),
                        nondegenerate: false,
                    };
                    let direct = count_molecule_decorations(&m, &spec).unwrap();
                    assert_eq!(direct, couple_side(&c, k, l, l, window), "{} k={k}", c.canonical_key());
                }
            }
            // round trip
            for d in enumerate_decorations(&c, WaveNumber::new(2, l), &LeafBounds::window(3)).unwrap() {
                let md = decoration_transfer(&c, &m, &d, 2.0).unwrap();
                assert_eq!(decoration_from_molecule(&c, &m, &md, 2).unwrap(), d);
            }
        }
    }
}

#[test]
fn gamma_relates_to_resonance() {
    let (c, _) = five_atom_couple();
    let m = build_molecule(&c).unwrap();
    let l = 6;
    let disp = Dispersion::new(0.5, l);
    let [rp, rm] = c.roots();
    for d in enumerate_decorations(&c, WaveNumber::new(1, l), &LeafBounds::window(2)).unwrap().iter().step_by(37) {
        let md = decoration_transfer(&c, &m, d, 0.5).unwrap();
        for (v, atom) in m.atoms.iter().enumerate() {
            let node = atom.node.unwrap();
            let (om, _) = local_factors(&c, &d.values, l, node, 0.5).unwrap();
            let z = c.sign(node).value() as f64;
            let want = if node == rp || node == rm { -z * (om + disp.w(d.values[node])) } else { -z * om };
            assert!((md.beta[v] - want).abs() < 1e-12, "atom {v}");
        }
    }
}

#[test]
fn inconsistent_boxes_give_zero() {
    let (c, _) = five_atom_couple();
    let m = build_molecule(&c).unwrap();
    let mut centers = vec![0.0; m.bond_count()];
    // a bridge-free molecule; pushing one bond's box far away leaves no room
    centers[0] = 50.0;
    let spec = MoleculeCountSpec {
        k: 0,
        l: 4,
        sigma: 2.0,
        centers,
        beta: vec![0.0; 5],
        window: None,
        nondegenerate: false,
    };
    assert_eq!(count_molecule_decorations(&m, &spec).unwrap(), 0);
}
