use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use wavekin::algorithm::{
    check_count_identities, exhaustive_bound_sweep, run_algorithm, strict_exclusion, verify_phi, Mode, RunOptions,
    Scan, SweepConfig, TieBreak,
};
use wavekin::combinatorics::{couple_count, enumerate_couples, Couple, CoupleJson, Diagram};
use wavekin::counting::{count_solutions, five_vector_sweep, verify_vc_bounds, CountingProblem, CountingTuple, SizeRule, VcGrid};
use wavekin::fixtures::{double_bond_ladder_molecule, five_atom_couple};
use wavekin::kinetics::{
    collision_kernel, k2_discrete, kernel_conservation, kernel_grid, kernel_is_trivial, kinetic_time_ratio, parse_grid,
    KernelSpec,
};
use wavekin::molecules::{build_molecule, canonical_form, structure_report, Molecule};
use wavekin::simulator::{compare_to_theorem, ensemble_second_moment, theorem_time, EnsembleConfig};
use wavekin::splice::{irregular_chain_couple, preprocess, preprocess_fixpoint, twist_sum_factorization_check};
use wavekin::{Error, PhysicalParams, Result, Spectrum, WaveNumber};

use crate::manifest::Run;
use crate::{
    AlgorithmArgs, Cmd, CountArgs, EnumerateArgs, K2Args, KernelArgs, MoleculeArgs, SimulateArgs, SpliceArgs,
    VerifyArgs,
};

pub fn dispatch(cmd: &Cmd, out: &Path, argv: &[String]) -> Result<()> {
    let name = match cmd {
        Cmd::Enumerate(_) => "enumerate",
        Cmd::Molecule(_) => "molecule",
        Cmd::Splice(_) => "splice",
        Cmd::Algorithm(_) => "algorithm",
        Cmd::Verify(_) => "verify",
        Cmd::Count(_) => "count",
        Cmd::Kernel(_) => "kernel",
        Cmd::K2(_) => "k2",
        Cmd::Simulate(_) => "simulate",
        Cmd::Report(_) => "report",
    };
    let mut run = Run::new(out, name)?;
    let result = match cmd {
        Cmd::Enumerate(a) => enumerate(a, &mut run),
        Cmd::Molecule(a) => molecule(a, &mut run),
        Cmd::Splice(a) => splice(a, &mut run),
        Cmd::Algorithm(a) => algorithm(a, &mut run),
        Cmd::Verify(a) => verify(a, &mut run),
        Cmd::Count(a) => count(a, &mut run),
        Cmd::Kernel(a) => kernel(a, &mut run),
        Cmd::K2(a) => k2(a, &mut run),
        Cmd::Simulate(a) => simulate(a, &mut run),
        Cmd::Report(a) => crate::report::report(&a.inputs, &mut run),
    };
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) if e.is_violation() => format!("violation: {e}"),
        Err(e) => format!("error: {e}"),
    };
    // usage errors leave no manifest behind
    if !matches!(result, Err(Error::Usage(_))) {
        run.finish(argv, &status)?;
    }
    result
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let s = std::fs::read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn read_couple(path: &Path) -> Result<Couple> {
    let j: CoupleJson =
        serde_json::from_value(read_json(path)?).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Couple::from_json(&j)
}

fn fixture_param(s: &str, prefix: &str) -> Result<u32> {
    s.strip_prefix(prefix)
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::Usage(format!("fixture `{s}`: expected {prefix}<n>")))
}

fn parse_spectrum(s: &str) -> Result<Spectrum> {
    let parts: Vec<&str> = s.split(':').collect();
    let sp = match parts.as_slice() {
        ["gaussian"] => Spectrum::gaussian(),
        ["gaussian", a, w] => {
            let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Usage(format!("spectrum `{s}`: bad number `{x}`")));
            Spectrum::Gaussian { amplitude: num(a)?, width: num(w)?, cutoff: None }
        }
        _ => return Err(Error::Usage(format!("spectrum `{s}`: expected gaussian or gaussian:<amp>:<width>"))),
    };
    sp.validate()?;
    Ok(sp)
}

fn enumerate(a: &EnumerateArgs, run: &mut Run) -> Result<()> {
    run.config = json!({ "order": a.order, "list": a.list });
    let mut csv = String::from("order,couples,expected\n");
    let mut bad = Vec::new();
    let mut lines = String::new();
    for n in 0..=a.order {
        let mut count = 0u64;
        for c in enumerate_couples(n)? {
            count += 1;
            if a.list && n == a.order {
                lines.push_str(&serde_json::to_string(&c.to_json())?);
                lines.push('\n');
            }
        }
        let expected = couple_count(n);
        writeln!(csv, "{n},{count},{expected}").unwrap();
        if count != expected {
            bad.push(n);
        }
    }
    let p = run.text("enumerate.csv", &csv)?;
    if a.list {
        run.text("couples.jsonl", &lines)?;
    }
    if !bad.is_empty() {
        return Err(Error::Theory(format!("couple counts differ at orders {bad:?}; see {}", p.display())));
    }
    Ok(())
}

fn molecule(a: &MoleculeArgs, run: &mut Run) -> Result<()> {
    let (c, labels) = match (&a.couple, a.fixture.as_deref()) {
        (Some(p), _) => (read_couple(p)?, Vec::new()),
        (None, Some("five-atom")) => five_atom_couple(),
        (None, Some(f)) => return Err(Error::Usage(format!("unknown fixture `{f}`"))),
        (None, None) => return Err(Error::Usage("give --couple or --fixture".into())),
    };
    run.config = json!({ "couple": c.to_json(), "labels": labels });
    let m = wavekin::molecules::build_molecule_labelled(&c, &labels)?;
    let rep = structure_report(&m, None);
    let n = c.order();
    let ok = m.atom_count() == n && m.bond_count() == 2 * n - 1 && rep.connected;
    let p = run.json("molecule.json", &json!({ "molecule": m.to_json(), "structure": rep }))?;
    if !ok {
        return Err(Error::Theory(format!(
            "molecule has {} atoms and {} bonds for order {n}; see {}",
            m.atom_count(),
            m.bond_count(),
            p.display()
        )));
    }
    Ok(())
}

fn splice(a: &SpliceArgs, run: &mut Run) -> Result<()> {
    if let Some(samples) = a.twist_sum_samples {
        return twist_sum_suite(samples, a.seed, run);
    }
    let c = match (&a.couple, a.fixture.as_deref()) {
        (Some(p), _) => read_couple(p)?,
        (None, Some(f)) => irregular_chain_couple(fixture_param(f, "irregular:")? as usize)?.0,
        (None, None) => return Err(Error::Usage("give --couple, --fixture or --twist-sum-samples".into())),
    };
    run.config = json!({ "couple": c.to_json(), "fixpoint": a.fixpoint });
    let (out, passes) = if a.fixpoint { preprocess_fixpoint(&c)? } else { (preprocess(&c)?, 1) };
    run.json(
        "spliced.json",
        &json!({
            "input": c.to_json(),
            "output": out.to_json(),
            "inputOrder": c.order(),
            "outputOrder": out.order(),
            "passes": passes,
        }),
    )?;
    Ok(())
}

fn twist_sum_suite(samples: usize, seed: u64, run: &mut Run) -> Result<()> {
    run.config = json!({ "twistSumSamples": samples, "seed": seed });
    run.seeds = vec![seed];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nin = Spectrum::gaussian();
    let l = 24;
    let mut csv = String::from("q,h,ks,relErr,pass\n");
    let mut failed = Vec::new();
    for i in 0..samples {
        let q = rng.random_range(1..=4usize);
        let h = rng.random_range(-12..=12i64);
        let ks: Vec<i64> = (0..q).map(|_| rng.random_range(-50..=50)).collect();
        let wk: Vec<WaveNumber> = ks.iter().map(|&k| WaveNumber::new(k, l)).collect();
        let r = twist_sum_factorization_check(q, WaveNumber::new(h, l), &wk, &nin)?;
        let ks_s: Vec<String> = ks.iter().map(i64::to_string).collect();
        writeln!(csv, "{q},{h},{},{:e},{}", ks_s.join(" "), r.rel_err, r.pass).unwrap();
        if !r.pass {
            failed.push(i + 2);
        }
    }
    let p = run.text("twist_sum.csv", &csv)?;
    if !failed.is_empty() {
        return Err(Error::Theory(format!("twist-sum factorization fails on lines {failed:?} of {}", p.display())));
    }
    Ok(())
}

fn algorithm(a: &AlgorithmArgs, run: &mut Run) -> Result<()> {
    let m = match (&a.molecule, a.fixture.as_deref()) {
        (Some(p), _) => Molecule::from_json(&read_json(p)?)?,
        (None, Some(f)) => double_bond_ladder_molecule(fixture_param(f, "ladder:")?),
        (None, None) => return Err(Error::Usage("give --molecule or --fixture".into())),
    };
    let tie_break: TieBreak = a.tie_break.parse()?;
    if let TieBreak::Random(s) = tie_break {
        run.seeds = vec![s];
    }
    let mut opts = if a.relaxed { RunOptions::relaxed(tie_break) } else { RunOptions::strict(tie_break) };
    if a.jump_table {
        opts.scan = Scan::JumpTable;
    }
    run.config = json!({
        "molecule": m.to_json(),
        "tieBreak": a.tie_break,
        "mode": opts.mode,
        "scan": opts.scan,
    });
    let r = run_algorithm(&m, &opts)?;
    let ids = check_count_identities(&r.counts, r.n, opts.mode == Mode::Strict);
    let phi = verify_phi(&r.tree);
    let mut doc = r.to_json();
    doc["identities"] = serde_json::to_value(&ids)?;
    doc["phi"] = serde_json::to_value(&phi)?;
    doc["treeLabels"] = json!(r
        .tree
        .nodes
        .keys()
        .map(|&k| (k.to_string(), json!(r.tree.labels(k))))
        .collect::<serde_json::Map<String, serde_json::Value>>());
    run.json("operation_tree.json", &doc)?;
    let trace = run.text("trace.csv", &r.trace_csv())?;
    if let Some(v) = r.monitors.first() {
        return Err(Error::Theory(format!(
            "monitor {} fired at step {} ({}); see {}",
            v.monitor,
            v.step,
            v.detail,
            trace.display()
        )));
    }
    if !ids.pass {
        let failed: Vec<&str> = ids.checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
        return Err(Error::Theory(format!("count identities fail: {failed:?}; see {}", trace.display())));
    }
    if !phi.pass {
        return Err(Error::Theory(format!("phi map: {:?}", phi.violations)));
    }
    Ok(())
}

fn verify(a: &VerifyArgs, run: &mut Run) -> Result<()> {
    match a.suite.as_str() {
        "identities" => identity_suite(a, run),
        "bounds" => {
            let grid = VcGrid::default();
            run.config = serde_json::to_value(&grid)?;
            let rep = verify_vc_bounds(&grid)?;
            let p = run.text("bounds.csv", &rep.csv())?;
            run.json("bounds.json", &rep)?;
            if !rep.pass {
                return Err(Error::Theory(format!("counting bounds violated; see {}", p.display())));
            }
            Ok(())
        }
        "five-vector" => {
            let (ls, divs) = ([128, 256, 512], [32, 16, 8]);
            run.config = json!({ "Ls": ls, "divisors": divs });
            let rep = five_vector_sweep(&ls, &divs)?;
            let mut csv = String::from("L,T,oracle,boxCount,overTarget\n");
            for p in &rep.points {
                writeln!(csv, "{},{},{},{},{:e}", p.l, p.t, p.oracle, p.box_count, p.over_target).unwrap();
            }
            let p = run.text("five_vector.csv", &csv)?;
            run.json("five_vector.json", &rep)?;
            if !rep.oracle_dominates_box {
                return Err(Error::Theory(format!("box construction exceeds the count; see {}", p.display())));
            }
            Ok(())
        }
        "twist-sum" => twist_sum_suite(100, a.seed, run),
        s => Err(Error::Usage(format!("unknown suite `{s}`: expected identities, bounds, five-vector or twist-sum"))),
    }
}

/// One row per distinct preprocessed molecule under the lowest-id policy,
/// plus the multi-policy sweep summary.
fn identity_suite(a: &VerifyArgs, run: &mut Run) -> Result<()> {
    let mode = if a.relaxed { Mode::Relaxed } else { Mode::Strict };
    let cfg = SweepConfig { max_order: a.max_order, policies: a.policies, seed: a.seed, mode };
    run.config = serde_json::to_value(&cfg)?;
    run.seeds = vec![a.seed];
    let mut seen = BTreeSet::new();
    let mut mols = Vec::new();
    for n in 1..=a.max_order {
        for c in enumerate_couples(n)? {
            let (p, _) = preprocess_fixpoint(&preprocess(&c)?)?;
            if p.order() == 0 {
                continue;
            }
            let m = build_molecule(&p)?;
            if mode == Mode::Strict && strict_exclusion(&m).is_some() {
                continue;
            }
            if seen.insert(canonical_form(&m)?) {
                mols.push(m);
            }
        }
    }
    let mut csv = String::from("molecule,n,m3,m2,m0,m1,m4,check,lhs,rhs,holds\n");
    let mut failing = Vec::new();
    for (i, m) in mols.iter().enumerate() {
        let opts = RunOptions { mode, ..Default::default() };
        let r = run_algorithm(m, &opts)?;
        let ids = check_count_identities(&r.counts, r.n, mode == Mode::Strict);
        let c = r.counts;
        for chk in &ids.checks {
            writeln!(csv, "{i},{},{},{},{},{},{},{},{},{},{}", r.n, c.m3, c.m2, c.m0, c.m1, c.m4, chk.name, chk.lhs, chk.rhs, chk.holds)
                .unwrap();
        }
        if !ids.pass || !r.monitors.is_empty() {
            failing.push(i);
        }
    }
    let p = run.text("identities.csv", &csv)?;
    let sweep = if a.policies > 0 { Some(exhaustive_bound_sweep(&cfg)?) } else { None };
    run.json("identities.json", &json!({ "molecules": mols.len(), "failing": failing, "sweep": sweep }))?;
    if !failing.is_empty() {
        return Err(Error::Theory(format!("identities fail for molecules {failing:?}; see {}", p.display())));
    }
    if let Some(s) = sweep.filter(|s| !s.pass) {
        return Err(Error::Theory(format!("policy sweep: {:?}", s.fixpoint.examples)));
    }
    Ok(())
}

fn count(a: &CountArgs, run: &mut Run) -> Result<()> {
    let tuple = CountingTuple::parse(&a.tuple, a.k, a.beta)?;
    let centers = if a.centers.is_empty() { vec![0.0; tuple.terms.len()] } else { a.centers.clone() };
    let mut p = CountingProblem::single(tuple, &centers, a.l, a.t, a.sigma, a.d)?;
    if a.unchecked {
        p.size_rule = SizeRule::Unchecked;
    }
    run.config = serde_json::to_value(&p)?;
    let n = count_solutions(&p)?;
    run.json("count.json", &json!({ "problem": p, "count": n }))?;
    println!("{n}");
    Ok(())
}

fn kernel(a: &KernelArgs, run: &mut Run) -> Result<()> {
    let nin = parse_spectrum(&a.spectrum)?;
    let xi = parse_grid(&a.xi_grid)?;
    let spec = KernelSpec::default();
    run.config = json!({ "sigma": a.sigma, "spectrum": nin, "xiGrid": a.xi_grid, "quadrature": spec });
    let g = kernel_grid(&nin, &xi, a.sigma, &spec)?;
    run.text("kernel.csv", &g.csv())?;
    let (m0, m1, m2) = g.moments();
    let conservation = if a.conservation { Some(kernel_conservation(&nin, a.sigma, &spec, 1e-6)?) } else { None };
    run.json("kernel.json", &json!({ "trivial": kernel_is_trivial(a.sigma), "moments": [m0, m1, m2], "conservation": conservation }))?;
    if let Some(c) = conservation.filter(|c| !c.pass) {
        return Err(Error::Theory(format!("kernel conservation fails: mass {:e}, energy {:e}", c.mass, c.energy)));
    }
    Ok(())
}

fn k2(a: &K2Args, run: &mut Run) -> Result<()> {
    let nin = parse_spectrum(&a.spectrum)?;
    let p = match (a.alpha, a.gamma) {
        (Some(al), None) => {
            let t = a.t.ok_or_else(|| Error::Usage("--T is required with --alpha".into()))?;
            PhysicalParams::new(a.l, al, t, a.sigma)
        }
        (None, Some(g)) => {
            let t = a.t.unwrap_or_else(|| theorem_time(a.l, g, a.sigma, 0.05));
            PhysicalParams::with_gamma(a.l, g, t, a.sigma)
        }
        _ => return Err(Error::Usage("give exactly one of --alpha and --gamma".into())),
    };
    p.validate()?;
    let ks = parse_grid(&a.k_grid)?;
    run.config = json!({ "params": p, "s": a.s, "spectrum": nin, "kGrid": a.k_grid });
    let tau = kinetic_time_ratio(&p, a.s);
    let spec = KernelSpec::default();
    let mut csv = String::from("k,k2,ratio,kinetic\n");
    for k in ks {
        let j = (k * a.l as f64).round();
        if (j - k * a.l as f64).abs() > 1e-9 {
            return Err(Error::Usage(format!("k = {k} is not on the lattice of size {}", a.l)));
        }
        let v = k2_discrete(&p, a.s, WaveNumber::new(j as i64, a.l), &nin)?;
        let kin = if kernel_is_trivial(a.sigma) { 0.0 } else { collision_kernel(&nin, k, a.sigma, &spec)? };
        let ratio = if tau > 0.0 { v / tau } else { 0.0 };
        writeln!(csv, "{k},{v:e},{ratio:e},{kin:e}").unwrap();
    }
    run.text("k2.csv", &csv)?;
    Ok(())
}

fn simulate(a: &SimulateArgs, run: &mut Run) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg: EnsembleConfig =
        toml::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", a.config.display())))?;
    if let Some(m) = a.members {
        cfg.members = m;
    }
    if let Some(s) = a.seed_base {
        cfg.seed_base = s;
    }
    if let Some(l) = a.l {
        cfg.l = l;
    }
    cfg.validate()?;
    run.config = serde_json::to_value(&cfg)?;
    run.seeds = cfg.seeds().collect();
    let stats = ensemble_second_moment(&cfg)?;
    run.text("stats.csv", &stats.csv())?;
    let rep = compare_to_theorem(&stats, &cfg.spectrum, a.k_max, &KernelSpec::default())?;
    let mut csv = String::from("L,sigma,t,tau,k,shift,se,kinetic,residual\n");
    for r in &rep.rows {
        let tau = rep.sup.iter().find(|s| s.t == r.t).map_or(0.0, |s| s.tau);
        writeln!(csv, "{},{},{},{:e},{},{:e},{:e},{:e},{:e}", rep.l, rep.sigma, r.t, tau, r.k, r.shift, r.se, r.kinetic, r.residual)
            .unwrap();
    }
    run.text("residuals.csv", &csv)?;
    let mut summary = serde_json::to_value(&stats)?;
    if let serde_json::Value::Object(m) = &mut summary {
        for big in ["meanSq", "se", "meanChange", "seChange", "meanReduced", "seReduced", "seconds"] {
            m.remove(big);
        }
    }
    run.json("simulate.json", &json!({ "stats": summary, "theorem": { "tkin": rep.tkin, "fittedConstant": rep.fitted_constant, "sup": rep.sup } }))?;
    Ok(())
}
