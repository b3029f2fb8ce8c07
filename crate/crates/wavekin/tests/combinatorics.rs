use std::collections::HashSet;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavekin::combinatorics::*;
use wavekin::fixtures::five_atom_couple;
use wavekin::{Dispersion, PhysicalParams, Spectrum, WaveNumber};

fn catalan_recurrence(n: usize) -> u64 {
    let mut c = vec![1u64];
    for m in 1..=n {
        let mut s = 0;
        for a in 0..m {
            for b in 0..m - a {
                s += c[a] * c[b] * c[m - 1 - a - b];
            }
        }
        c.push(s);
    }
    c[n]
}

#[test]
fn tree_counts_follow_catalan_recurrence() {
    for n in 0..=6 {
        let trees = enumerate_trees(n, Sign::Plus).unwrap();
        assert_eq!(trees.len() as u64, catalan_recurrence(n), "order {n}");
        assert_eq!(ternary_catalan(n), catalan_recurrence(n));
        let codes: HashSet<String> = trees.iter().map(|t| t.code()).collect();
        assert_eq!(codes.len(), trees.len());
        for t in &trees {
            assert_eq!(t.order(), n);
            assert_eq!(t.leaves().len(), 2 * n + 1);
            for v in t.branching_nodes() {
                let ch = t.node(v).children.unwrap();
                let z = t.sign(v);
                assert_eq!([t.sign(ch[0]), t.sign(ch[1]), t.sign(ch[2])], [z, -z, z]);
            }
        }
    }
    assert_eq!(enumerate_trees(2, Sign::Minus).unwrap().len(), 3);
    assert!(matches!(enumerate_trees(9, Sign::Plus), Err(wavekin::Error::Resource(_))));
}

/// Count opposite-sign perfect matchings of a leaf sign list by brute force.
fn matchings(signs: &[Sign]) -> u64 {
    if signs.is_empty() {
        return 1;
    }
    let first = signs[0];
    let mut total = 0;
    for j in 1..signs.len() {
        if signs[j] != first {
            let rest: Vec<Sign> =
                signs.iter().enumerate().filter(|&(i, _)| i != 0 && i != j).map(|(_, s)| *s).collect();
            total += matchings(&rest);
        }
    }
    total
}

#[test]
fn couple_counts_match_matching_oracle() {
    for n in 0..=3 {
        let mut oracle = 0;
        for a in 0..=n {
            for tp in enumerate_trees(a, Sign::Plus).unwrap() {
                for tm in enumerate_trees(n - a, Sign::Minus).unwrap() {
                    let signs: Vec<Sign> =
                        tp.leaves().iter().map(|&x| tp.sign(x)).chain(tm.leaves().iter().map(|&x| tm.sign(x))).collect();
                    oracle += matchings(&signs);
                }
            }
        }
        let couples: Vec<Couple> = enumerate_couples(n).unwrap().collect();
        assert_eq!(couples.len() as u64, oracle, "order {n}");
        assert_eq!(couple_count(n), oracle);
        let keys: HashSet<String> = couples.iter().map(|c| c.canonical_key()).collect();
        assert_eq!(keys.len(), couples.len());
        for c in &couples {
            c.validate().unwrap();
            assert_eq!(c.pairs().len(), n + 1);
            for (a, b) in c.pairs() {
                assert_ne!(c.sign(a), c.sign(b));
            }
        }
    }
    assert_eq!(enumerate_couples(0).unwrap().count(), 1);
    assert_eq!(enumerate_couples(1).unwrap().count(), 4);
    assert!(matches!(enumerate_couples(7), Err(wavekin::Error::Resource(_))));
}

#[test]
fn order_five_enumeration_contains_reference_couple() {
    let (c, _) = five_atom_couple();
    let key = c.canonical_key();
    assert!(enumerate_couples(5).unwrap().any(|x| x.canonical_key() == key));
}

#[test]
fn couple_json_round_trip() {
    let (c, _) = five_atom_couple();
    let j = c.to_json();
    let text = serde_json::to_string(&j).unwrap();
    assert!(text.contains("schemaVersion"));
    let back = Couple::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.canonical_key(), c.canonical_key());
}

#[test]
fn local_factor_cases() {
    let t = SignedTernaryTree::from_code("3000", Sign::Plus).unwrap();
    // children 1..=3 carry (k1, k2, k3); parent k = k1 - k2 + k3
    let vals = |k1: i64, k2: i64, k3: i64| vec![k1 - k2 + k3, k1, k2, k3];
    let (om, eps) = local_factors(&t, &vals(1, 1, 1), 1, 0, 2.0).unwrap();
    assert_eq!((om, eps), (0.0, -1));
    assert_eq!(local_factors(&t, &vals(1, 1, 3), 1, 0, 2.0).unwrap().1, 0);
    let (om, eps) = local_factors(&t, &vals(1, 2, 3), 1, 0, 2.0).unwrap();
    assert_eq!(eps, 1);
    assert!((om - 2.0).abs() < 1e-15);
    assert!(matches!(local_factors(&t, &vals(1, 2, 3), 1, 1, 2.0), Err(wavekin::Error::Usage(_))));
}

/// Brute force over all leaf assignments in the window.
fn brute_decorations(c: &Couple, k: i64, w: i64, boxes: &LeafBounds, l: i64) -> u64 {
    let leaves = c.leaves();
    let mut vals = vec![-w; leaves.len()];
    let mut count = 0;
    let mut post: Vec<NodeId> = Vec::new();
    for r in c.roots() {
        post.extend(c.postorder_branching_from(r));
    }
    loop {
        let mut values = vec![0i64; c.nodes().len()];
        for (i, &x) in leaves.iter().enumerate() {
            values[x] = vals[i];
        }
        let paired = c.pairs().iter().all(|&(a, b)| values[a] == values[b]);
        let boxed = leaves.iter().all(|x| {
            boxes.boxes.get(x).is_none_or(|&cen| (values[*x] as f64 / l as f64 - cen).abs() <= 1.0 + 1e-12)
        });
        if paired && boxed {
            fill_internal(c, &post, &mut values);
            let [rp, rm] = c.roots();
            if values[rp] == k && values[rm] == k {
                count += 1;
            }
        }
        let mut j = 0;
        loop {
            if j == vals.len() {
                return count;
            }
            if vals[j] < w {
                vals[j] += 1;
                break;
            }
            vals[j] = -w;
            j += 1;
        }
    }
}

#[test]
fn decoration_counts_match_brute_force() {
    let trivial = Couple::trivial();
    assert_eq!(enumerate_decorations(&trivial, WaveNumber::new(3, 4), &LeafBounds::default()).unwrap().len(), 1);
    for n in 0..=2 {
        for c in enumerate_couples(n).unwrap() {
            for k in [0, 1] {
                let fast = enumerate_decorations(&c, WaveNumber::new(k, 2), &LeafBounds::window(2)).unwrap();
                assert_eq!(fast.len() as u64, brute_decorations(&c, k, 2, &LeafBounds::default(), 2));
                for d in &fast {
                    check_couple_decoration(&c, d).unwrap();
                }
            }
        }
    }
}

#[test]
fn boxes_are_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for c in enumerate_couples(2).unwrap().step_by(7) {
        let mut b = LeafBounds::window(6);
        for leaf in c.leaves() {
            b.boxes.insert(leaf, rng.random_range(-1.0..1.0));
        }
        // centers of paired leaves may disagree; both boxes must then hold
        let decs = enumerate_decorations(&c, WaveNumber::new(0, 3), &b).unwrap();
        assert_eq!(decs.len() as u64, brute_decorations(&c, 0, 6, &b, 3));
        for d in decs {
            for (&leaf, &cen) in &b.boxes {
                assert!((d.values[leaf] as f64 / 3.0 - cen).abs() <= 1.0 + 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn conservation_is_exact(order in 0usize..=3, pick in 0usize..10_000, k in -3i64..=3) {
        let all: Vec<Couple> = enumerate_couples(order).unwrap().collect();
        let c = &all[pick % all.len()];
        for d in enumerate_decorations(c, WaveNumber::new(k, 4), &LeafBounds::window(2)).unwrap() {
            prop_assert!(check_couple_decoration(c, &d).is_ok());
        }
    }
}

fn params() -> PhysicalParams {
    PhysicalParams::new(8, 0.1, 4.0, 2.0)
}

#[test]
fn trivial_couple_expression_is_the_spectrum() {
    let nin = Spectrum::gaussian();
    for (k, t, s) in [(0, 0.3, 0.9), (3, 1.0, 0.0), (-5, 0.5, 0.5)] {
        let v = evaluate_kq(&Couple::trivial(), WaveNumber::new(k, 8), t, s, &params(), &nin, &QuadSpec::default()).unwrap();
        assert!((v - Complex64::new(nin.eval(k as f64 / 8.0), 0.0)).norm() < 1e-15);
    }
}

#[test]
fn order_one_integral_matches_closed_form() {
    // plus tree of order 1, minus trivial: the only time integral is
    // ∫_0^t e^{iλu} du with λ = 2πTΩ at the plus root.
    let c = enumerate_couples(1).unwrap().find(|c| c.tree_orders() == (1, 0)).unwrap();
    let p = PhysicalParams::new(4, 1.0, 3.0, 2.0);
    let nin = Spectrum::Gaussian { amplitude: 1.0, width: 0.7, cutoff: Some(1.0) };
    let k = WaveNumber::new(1, 4);
    let t = 0.8;
    let got = evaluate_kq(&c, k, t, 0.4, &p, &nin, &QuadSpec::default()).unwrap();
    let disp = Dispersion::new(2.0, 4);
    let mut want = Complex64::new(0.0, 0.0);
    for d in enumerate_decorations(&c, k, &LeafBounds::window(4)).unwrap() {
        let (om, eps) = local_factors(&c, &d.values, 4, 0, 2.0).unwrap();
        if eps == 0 {
            continue;
        }
        let lam = 2.0 * std::f64::consts::PI * p.t_big * om;
        let integ = if lam == 0.0 {
            Complex64::new(t, 0.0)
        } else {
            (Complex64::from_polar(1.0, lam * t) - 1.0) / Complex64::new(0.0, lam)
        };
        let amp: f64 = c.pairs().iter().map(|&(a, _)| nin.eval(d.values[a] as f64 / 4.0)).product();
        want += integ * (eps as f64 * amp);
        let _ = disp;
    }
    want *= Complex64::new(0.0, 1.0) * (p.alpha * p.t_big / 4.0);
    assert!((got - want).norm() < 1e-12, "{got} vs {want}");
}

/// Independent estimate: uniform time samples on the bounding box with an
/// ordering indicator, summed over decorations.
fn mc_simplex(c: &Couple, k: WaveNumber, t: f64, s: f64, p: &PhysicalParams, nin: &Spectrum, n: usize) -> (Complex64, f64) {
    let w = nin.window(p.l);
    let decs = enumerate_decorations(c, k, &LeafBounds::window(w)).unwrap();
    let br = c.branching_nodes();
    let bound: Vec<f64> = br.iter().map(|&v| if c.tree_of(v) == 0 { t } else { s }).collect();
    let vol: f64 = bound.iter().product();
    let mut terms = Vec::new();
    for d in &decs {
        let mut eps = 1.0;
        let mut rates = Vec::new();
        for &v in &br {
            let (om, e) = local_factors(c, &d.values, p.l, v, p.sigma).unwrap();
            eps *= e as f64;
            rates.push(2.0 * std::f64::consts::PI * c.sign(v).value() as f64 * p.t_big * om);
        }
        let amp: f64 = c.pairs().iter().map(|&(a, _)| nin.eval(d.values[a] as f64 / p.l as f64)).product();
        if eps != 0.0 && amp != 0.0 {
            terms.push((eps * amp, rates));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..n {
        let times: Vec<f64> = bound.iter().map(|&b| rng.random_range(0.0..b)).collect();
        let ordered = br.iter().enumerate().all(|(i, &v)| {
            c.node(v).children.unwrap().iter().all(|ch| br.iter().position(|x| x == ch).is_none_or(|j| times[j] < times[i]))
        });
        let mut val = Complex64::new(0.0, 0.0);
        if ordered {
            for (a, rates) in &terms {
                let ph: f64 = rates.iter().zip(&times).map(|(r, t)| r * t).sum();
                val += Complex64::from_polar(*a * vol, ph);
            }
        }
        sum += val;
        sq += val.norm_sqr();
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean.norm_sqr()).max(0.0) / n as f64).sqrt();
    let pref = c.zeta_factor() * (p.alpha * p.t_big / p.l as f64).powi(c.order() as i32);
    (mean * pref, se * pref.norm())
}

#[test]
fn order_two_expression_matches_monte_carlo_simplex() {
    let p = params();
    let nin = Spectrum::Gaussian { amplitude: 1.0, width: 1.0, cutoff: Some(1.0) };
    let k = WaveNumber::new(1, 8);
    let mut checked = 0;
    for c in enumerate_couples(2).unwrap().step_by(5) {
        let exact = evaluate_kq(&c, k, 0.9, 0.6, &p, &nin, &QuadSpec::default()).unwrap();
        let (mc, se) = mc_simplex(&c, k, 0.9, 0.6, &p, &nin, 4000);
        let tol = 3.0 * se + 1e-12 * exact.norm();
        assert!((exact - mc).norm() <= tol * std::f64::consts::SQRT_2, "{} : {exact} vs {mc} (se {se})", c.canonical_key());
        checked += 1;
    }
    assert!(checked >= 8);
}

#[test]
fn j_iterate_trivial_and_zero_time() {
    let p = params();
    let nin = Spectrum::gaussian();
    let k = WaveNumber::new(2, 8);
    let triv = SignedTernaryTree::trivial(Sign::Plus);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let got = sample_j_iterate(&triv, k, 0.7, &p, &nin, &mut rng).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = nin.window(8);
    let g = draw_modes(&mut rng, w);
    let want = g[(2 + w) as usize] * nin.eval(0.25).sqrt();
    assert!((got - want).norm() < 1e-15);

    let small = Spectrum::Gaussian { amplitude: 1.0, width: 1.0, cutoff: Some(0.5) };
    let tree = SignedTernaryTree::from_code("3000", Sign::Plus).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    assert_eq!(sample_j_iterate(&tree, k, 0.0, &p, &small, &mut rng).unwrap(), Complex64::new(0.0, 0.0));
    let a = sample_j_iterate(&tree, k, 0.5, &p, &small, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    let b = sample_j_iterate(&tree, k, 0.5, &p, &small, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
    assert_eq!(a, b);
    assert!(a.norm() > 0.0);
}

#[test]
fn isserlis_low_orders() {
    let p = PhysicalParams::new(8, 0.5, 2.0, 2.0);
    let nin = Spectrum::Gaussian { amplitude: 1.0, width: 1.0, cutoff: Some(0.3) };
    let k = WaveNumber::new(0, 8);
    let cfg = IsserlisConfig { samples: 20_000, seed: 17, ..Default::default() };
    let reps = isserlis_check_many(&[(0, 0), (0, 1), (1, 0), (1, 1)], k, &p, &nin, &cfg).unwrap();
    assert!((reps[0].predicted - Complex64::new(nin.eval(0.0), 0.0)).norm() < 1e-15);
    assert!(reps[1].predicted.re.abs() < 1e-14 * reps[1].predicted.norm().max(1.0));
    assert!(reps[1].predicted.im.abs() > 0.0);
    for r in &reps {
        assert!(r.z <= 4.0, "{r:?}");
    }
    assert!(matches!(isserlis_check(2, 1, k, &p, &nin, &cfg), Err(wavekin::Error::Usage(_))));
}

#[test]
fn flower_stems() {
    let f = flower_structure(&Couple::trivial(), 0, 0).unwrap();
    assert_eq!((f.height_plus, f.height_minus), (0, 0));
    assert!(f.admissible);
    let (c, labels) = five_atom_couple();
    let label = |v: NodeId| labels.iter().find(|x| x.0 == v).unwrap().1;
    let f = flower_structure(&c, 9, 1).unwrap();
    assert_eq!(f.stem_plus.iter().map(|&v| label(v)).collect::<Vec<_>>(), vec![1]);
    assert_eq!(f.stem_minus.iter().map(|&v| label(v)).collect::<Vec<_>>(), vec![2]);
    assert_eq!(f.height(), 1);
    // subtrees hanging off the plus stem are rooted at atoms 3 and 4
    assert_eq!(f.max_attached_order, 1);
    assert!(f.admissible);
    assert!(!flower_structure(&c, 9, 0).unwrap().admissible);
    // leaf a (id 2) pairs inside the plus tree
    assert!(matches!(flower_structure(&c, 2, 3), Err(wavekin::Error::Domain(_))));
}
