use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavekin::combinatorics::*;
use wavekin::molecules::*;
use wavekin::splice::*;
use wavekin::{Spectrum, WaveNumber};

fn first_decoration(c: &Couple, k: i64, l: i64, window: i64) -> Option<Decoration> {
    let mut out = None;
    let mut seen = 0u64;
    for_each_couple_decoration(c, k, l, &LeafBounds::window(window), |v| {
        // take a decoration from the middle of the list to avoid all-equal values
        seen += 1;
        if seen == 7 || out.is_none() {
            out = Some(v.to_vec());
        }
    })
    .unwrap();
    out.map(|values| Decoration { l, values })
}

/// Direct expansion over sign vectors, independent of the couple machinery.
fn expansion_oracle(h: i64, ks: &[i64], l: i64, nin: &Spectrum) -> Complex64 {
    let n = |x: i64| nin.eval(x as f64 / l as f64);
    let q = ks.len();
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..1 << q {
        let mut term = Complex64::new(1.0, 0.0);
        for (j, &k) in ks.iter().enumerate() {
            let twisted = mask >> j & 1 == 1;
            let (s, val) = if twisted { (-1.0, k) } else { (1.0, k - h) };
            term *= Complex64::new(0.0, s) * n(val);
        }
        total += term;
    }
    total
}

#[test]
fn twist_sum_single_link_is_a_difference() {
    let nin = Spectrum::gaussian();
    let l = 16;
    let r = twist_sum_factorization_check(1, WaveNumber::new(3, l), &[WaveNumber::new(5, l)], &nin).unwrap();
    let want = Complex64::new(0.0, nin.eval(2.0 / 16.0) - nin.eval(5.0 / 16.0));
    assert!((r.direct - want).norm() < 1e-15);
    assert!(r.pass && r.phase_preserved);
    assert_eq!(r.images, 2);
}

#[test]
fn twist_sum_vanishes_without_gap() {
    let nin = Spectrum::gaussian();
    for q in 1..=4 {
        let ks: Vec<WaveNumber> = (0..q).map(|j| WaveNumber::new(2 * j as i64 - 3, 8)).collect();
        let r = twist_sum_factorization_check(q, WaveNumber::new(0, 8), &ks, &nin).unwrap();
        assert_eq!(r.factorized, Complex64::new(0.0, 0.0));
        assert!(r.direct.norm() < 1e-15, "q = {q}: {}", r.direct);
    }
}

#[test]
fn twist_sum_matches_expansion_oracle() {
    let nin = Spectrum::gaussian();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let l = 32;
    for _ in 0..20 {
        let h = rng.random_range(-10..=10);
        let ks: Vec<i64> = (0..3).map(|_| rng.random_range(-40..=40)).collect();
        let wk: Vec<WaveNumber> = ks.iter().map(|&k| WaveNumber::new(k, l)).collect();
        let r = twist_sum_factorization_check(3, WaveNumber::new(h, l), &wk, &nin).unwrap();
        let oracle = expansion_oracle(h, &ks, l, &nin);
        let scale = oracle.norm().max(1e-300);
        assert!((r.direct - oracle).norm() <= 1e-12 * scale.max(r.factorized.norm()) + 1e-300);
        assert!(r.pass, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]
    #[test]
    fn twist_sum_factorizes(q in 1usize..=4, h in -12i64..=12, ks in prop::collection::vec(-50i64..=50, 4)) {
        let nin = Spectrum::gaussian();
        let wk: Vec<WaveNumber> = ks[..q].iter().map(|&k| WaveNumber::new(k, 24)).collect();
        let r = twist_sum_factorization_check(q, WaveNumber::new(h, 24), &wk, &nin).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}

#[test]
fn chain_congruence_class_has_full_size() {
    for q in 1..=3 {
        let (c, chain) = irregular_chain_couple(q).unwrap();
        let links = chain.nodes[1..].to_vec();
        assert_eq!(twist_admissible_nodes(&c), links);
        // oracle: distinct canonical keys over all subsets, built by hand
        let mut keys = HashSet::new();
        for mask in 0u32..1 << q {
            let mut cur = c.clone();
            for (j, &v) in links.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    cur = unit_twist(&cur, v, None).unwrap().0;
                }
            }
            keys.insert(cur.canonical_key());
        }
        assert_eq!(keys.len(), 1 << q);
        assert_eq!(congruence_class(&c, &links).unwrap().len(), 1 << q);
    }
    let (c, chain) = irregular_chain_couple(2).unwrap();
    assert_eq!(congruence_class(&c, &[]).unwrap().len(), 1);
    assert_eq!(congruence_class(&c, &chain.nodes[1..2]).unwrap().len(), 2);
    assert!(matches!(congruence_class(&c, &[0]), Err(wavekin::Error::Domain(_))));
}

#[test]
fn twist_flips_sign_and_preserves_phase() {
    let (c, chain) = irregular_chain_couple(1).unwrap();
    let dec = decorate_chain(&c, &chain, 2, &[5], 8).unwrap();
    let n2 = chain.nodes[1];
    let (t, td) = unit_twist(&c, n2, Some(&dec)).unwrap();
    let td = td.unwrap();
    assert_eq!(t.sign(n2), -c.sign(n2));
    assert_eq!(td.values[n2], dec.values[chain.m[0]]);
    assert_eq!(td.values[chain.m[0]], dec.values[n2]);
    assert_eq!(td.values[chain.p[0]], dec.values[n2]);
    check_couple_decoration(&t, &td).unwrap();
    let (om, _) = local_factors(&c, &dec.values, 8, n2, 2.0).unwrap();
    let (om2, _) = local_factors(&t, &td.values, 8, n2, 2.0).unwrap();
    assert_eq!(om, -om2);
}

/// The maximal run of twist-admissible links through `v`, with its top.
fn irregular_segment(c: &Couple, v: NodeId) -> Vec<NodeId> {
    let mut up = vec![v];
    let mut cur = v;
    while let Some(s) = admissible_site(c, cur).filter(|s| s.twistable) {
        up.push(s.n1);
        cur = s.n1;
    }
    up.reverse();
    let mut cur = v;
    loop {
        let kids = c.node(cur).children.unwrap();
        let next = kids.iter().copied().find(|&x| is_twist_admissible(c, x) && c.node(x).parent == Some(cur));
        match next {
            Some(x) => {
                up.push(x);
                cur = x;
            }
            None => break,
        }
    }
    up
}

#[test]
fn twist_laws_exhaustive_low_order() {
    let mut sites = 0;
    for n in 1..=4 {
        for c in enumerate_couples(n).unwrap() {
            let adm = twist_admissible_nodes(&c);
            let dec = first_decoration(&c, 1, 8, 2);
            for &v in &adm {
                sites += 1;
                let (t, td) = unit_twist(&c, v, dec.as_ref()).unwrap();
                t.validate().unwrap();
                let (back, bd) = unit_twist(&t, v, td.as_ref()).unwrap();
                assert_eq!(back, c);
                assert_eq!(bd, dec);
                for &w in &adm {
                    if w != v {
                        let a = twist_all(&c, &[v, w], None).unwrap().0;
                        let b = twist_all(&c, &[w, v], None).unwrap().0;
                        assert_eq!(a, b);
                    }
                }
                let seg = irregular_segment(&c, v);
                if let (Some(d), Some(tdd)) = (&dec, &td) {
                    check_couple_decoration(&t, tdd).unwrap();
                    let (s1, d1) = splice_decorated(&c, &seg, d).unwrap();
                    let (s2, d2) = splice_decorated(&t, &seg, tdd).unwrap();
                    assert_eq!(s1, s2);
                    assert_eq!(d1, d2);
                    check_couple_decoration(&s1, &d1).unwrap();
                }
            }
        }
    }
    assert!(sites > 50, "{sites}");
}

#[test]
fn splice_of_length_zero_is_identity() {
    let (c, chain) = irregular_chain_couple(2).unwrap();
    assert_eq!(splice(&c, &chain.nodes[..1]).unwrap(), c);
    assert!(matches!(splice(&c, &[0, 5]), Err(wavekin::Error::Domain(_))));
}

#[test]
fn splicing_an_irregular_chain_collapses_it() {
    // expected: plus root with children (b, c, a), minus root (r0, r1, r2),
    // pairs a-r0, c-r1, b-r2
    let plus = SignedTernaryTree::from_code("3000", Sign::Plus).unwrap();
    let minus = SignedTernaryTree::from_code("3000", Sign::Minus).unwrap();
    let want = Couple::from_trees(&plus, &minus, &[(3, 5), (2, 6), (1, 7)]).unwrap();
    for q in 1..=4 {
        let (c, chain) = irregular_chain_couple(q).unwrap();
        let s = splice(&c, &chain.nodes).unwrap();
        assert_eq!(s.order(), c.order() - q);
        assert_eq!(s.canonical_key(), want.canonical_key());
        assert_eq!(s.spliced_at.len(), 1);
        assert_eq!(s.spliced_at[0].q, q);
        let dec = decorate_chain(&c, &chain, 3, &vec![4; q], 8).unwrap();
        assert_eq!(couple_chain_gap(&c, &chain, &dec).unwrap(), WaveNumber::new(3, 8));
        let (_, sd) = splice_decorated(&c, &chain.nodes, &dec).unwrap();
        check_couple_decoration(&s, &sd).unwrap();
        let json = serde_json::to_value(s.to_json()).unwrap();
        assert_eq!(json["splicedAt"][0]["q"], q);
    }
}

fn labelled(ids: &[u32], edges: &[(u32, u32, bool)]) -> Molecule {
    let plain: Vec<(u32, u32)> = edges.iter().map(|e| (e.0, e.1)).collect();
    let mut m = Molecule::from_edges(ids, &plain).unwrap();
    for (b, e) in m.bonds.iter_mut().zip(edges) {
        if e.2 {
            b.label = BondLabel::PC;
        }
    }
    m
}

#[test]
fn path_with_two_cl_double_bonds_is_one_chain() {
    let m = labelled(&[1, 2, 3], &[(1, 2, true), (2, 1, false), (2, 3, true), (3, 2, false)]);
    let chains = classify_chain_objects(&m);
    assert_eq!(chains.len(), 1);
    let ch = &chains[0];
    let ids: Vec<u32> = ch.atoms.iter().map(|&v| m.atoms[v].id).collect();
    assert!(ids == [1, 2, 3] || ids == [3, 2, 1]);
    assert_eq!(ch.kind, ChainKind::Chain);
    assert!(ch.cl_only && ch.negative && ch.irregular && ch.maximal);
}

#[test]
fn hyperchain_and_pseudo_hyperchain_shapes() {
    let base = [(1, 2, false), (2, 1, false), (2, 3, false), (3, 2, false), (3, 4, false), (4, 3, false)];
    let mut hyper = base.to_vec();
    hyper.push((1, 4, false));
    let m = labelled(&[1, 2, 3, 4], &hyper);
    let chains = classify_chain_objects(&m);
    assert_eq!(chains.len(), 1);
    assert_eq!(chains[0].kind, ChainKind::Hyperchain);
    assert!(!chains[0].cl_only);

    let mut pseudo = base.to_vec();
    pseudo.extend([(1, 5, false), (5, 4, false)]);
    let m = labelled(&[1, 2, 3, 4, 5], &pseudo);
    let chains = classify_chain_objects(&m);
    assert_eq!(chains.len(), 1);
    assert_eq!(chains[0].kind, ChainKind::PseudoHyperchain);
    assert_eq!(chains[0].apex.map(|v| m.atoms[v].id), Some(5));

    // same-direction double bonds form a chain that is not negative
    let m = labelled(&[1, 2, 3], &[(1, 2, false), (1, 2, false), (2, 3, false), (2, 3, false)]);
    let all = classify_chain_objects(&m);
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].q(), 2);
    assert!(!all[0].negative);
    assert!(classify_chain_objects_in(&m, ChainScope::Negative).is_empty());
}

/// CL chain `n_0 .. n_q` whose ends are also joined by one leaf pair: a
/// hyperchain without CN double bond.
fn cl_hyperchain_couple(q: usize) -> (Couple, Vec<NodeId>) {
    // n_j = (n_{j+1}, m_{j+1}, p_j), n_0 = (n_1, m_1, a), n_q = (b, c, p_q);
    // a pairs with c inside the plus tree, b with the trivial minus tree
    let code = format!("{}3000{}", "3".repeat(q), "00".repeat(q));
    let plus = SignedTernaryTree::from_code(&code, Sign::Plus).unwrap();
    let minus = SignedTernaryTree::trivial(Sign::Minus);
    let kids = |v: NodeId| plus.node(v).children.unwrap();
    let mut chain = vec![0];
    for _ in 0..q {
        chain.push(kids(*chain.last().unwrap())[0]);
    }
    let mut pairs = Vec::new();
    for j in 1..=q {
        pairs.push((kids(chain[j - 1])[1], kids(chain[j])[2]));
    }
    let [b, c, _] = kids(chain[q]);
    pairs.push((kids(0)[2], c));
    pairs.push((b, plus.nodes().len()));
    (Couple::from_trees(&plus, &minus, &pairs).unwrap(), chain)
}

#[test]
fn splice_set_rules() {
    // no chains
    let (c5, _) = wavekin::fixtures::five_atom_couple();
    assert!(choose_splice_set(&c5, &[]).unwrap().is_empty());

    // hyperchain with a CN double bond keeps every admissible node
    for q in 1..=3 {
        let (c, chain) = irregular_chain_couple(q).unwrap();
        let m = build_molecule(&c).unwrap();
        let objs = classify_chain_objects(&m);
        assert_eq!(objs.len(), 1);
        assert!(objs[0].has_cn());
        let set = choose_splice_set(&c, &objs).unwrap();
        assert_eq!(set, chain.nodes[1..].iter().copied().collect::<BTreeSet<_>>());
    }

    // CL-only hyperchain drops one node and leaves a triple bond
    for q in 2..=4 {
        let (c, chain) = cl_hyperchain_couple(q);
        let m = build_molecule(&c).unwrap();
        let objs = classify_chain_objects(&m);
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].kind, ChainKind::Hyperchain);
        assert!(objs[0].cl_only);
        let set = choose_splice_set(&c, &objs).unwrap();
        assert_eq!(set.len(), q - 1);
        assert!(set.iter().all(|v| chain[1..].contains(v)));
        let out = preprocess(&c).unwrap();
        assert_eq!(out.order(), c.order() - (q - 1));
        let mo = build_molecule(&out).unwrap();
        assert_eq!(mo.atom_count(), 2);
        assert_eq!(mo.multiplicity(0, 1), 3);
    }

    // a chain not belonging to the couple is rejected
    let (c, _) = irregular_chain_couple(2).unwrap();
    let (other, _) = cl_hyperchain_couple(3);
    let foreign = classify_chain_objects(&build_molecule(&other).unwrap());
    assert!(matches!(choose_splice_set(&c, &foreign), Err(wavekin::Error::Domain(_))));
}

#[test]
fn gaps_agree_along_decorated_negative_chains() {
    for q in 1..=3 {
        let (c, chain) = irregular_chain_couple(q).unwrap();
        let dec = decorate_chain(&c, &chain, -2, &vec![3; q], 8).unwrap();
        let m = build_molecule(&c).unwrap();
        let md = decoration_transfer(&c, &m, &dec, 2.0).unwrap();
        for obj in classify_chain_objects_in(&m, ChainScope::Negative) {
            let g = chain_gap(&m, &obj, &md, 100.0, 1.0).unwrap();
            assert_eq!(g.h.num.abs(), 2, "{g:?}");
            assert!(!g.small);
            assert!(GapClass::new(WaveNumber::new(1, 8), 16.0, 1.0).small);
        }
    }
}

fn cl_double_bonds_in_pseudo_hyperchains(m: &Molecule) -> bool {
    let objs = classify_chain_objects(m);
    classify_double_bonds(m).iter().filter(|d| d.kind == DoubleBondKind::CL).all(|d| {
        objs.iter().any(|o| o.kind == ChainKind::PseudoHyperchain && o.double_bonds.contains(d))
    })
}

#[test]
fn preprocess_leaves_cl_double_bonds_only_in_pseudo_hyperchains() {
    let mut spliced = 0;
    let mut second_pass = 0;
    for n in 2..=5 {
        for c in enumerate_couples(n).unwrap() {
            let out = preprocess(&c).unwrap();
            out.validate().unwrap();
            if out.order() < c.order() {
                spliced += 1;
            }
            if out.is_trivial() {
                continue;
            }
            let m = build_molecule(&out).unwrap();
            assert!(cl_double_bonds_in_pseudo_hyperchains(&m), "{}", c.canonical_key());
            for obj in classify_chain_objects(&m) {
                match obj.kind {
                    ChainKind::Chain => assert!(obj.q() == 1 && obj.has_cn(), "{}", c.canonical_key()),
                    ChainKind::Hyperchain => panic!("hyperchain survives in {}", c.canonical_key()),
                    ChainKind::PseudoHyperchain => assert_eq!(obj.q(), 1),
                }
            }
            if preprocess(&out).unwrap().order() < out.order() {
                second_pass += 1;
            }
        }
    }
    assert!(spliced > 0);
    eprintln!("spliced {spliced}, would splice again {second_pass}");
}

#[test]
fn preprocess_is_independent_of_exclusion_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 3..=5 {
        for c in enumerate_couples(n).unwrap() {
            let ex = Exclusion::Index(rng.random_range(0..8));
            let a = preprocess(&c).unwrap();
            let b = preprocess_with(&c, ex).unwrap();
            assert_eq!(a.order(), b.order());
            if !b.is_trivial() {
                assert!(cl_double_bonds_in_pseudo_hyperchains(&build_molecule(&b).unwrap()));
            }
        }
    }
}

#[test]
fn splice_kinds_are_recorded() {
    let (c, chain) = irregular_chain_couple(2).unwrap();
    let set: BTreeSet<NodeId> = chain.nodes[1..].iter().copied().collect();
    let kinds: BTreeMap<NodeId, ChainKind> = set.iter().map(|&v| (v, ChainKind::Hyperchain)).collect();
    let s = splice_at(&c, &set, &kinds).unwrap();
    assert_eq!(s.couple.spliced_at[0].kind, "hyperchain");
    assert_eq!(s.couple.spliced_at[0].node, s.map[chain.nodes[0]].unwrap());
}
