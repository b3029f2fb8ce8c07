//! Exhaustive check over couple-derived molecules: every couple up to a
//! given order is preprocessed, its molecule deduplicated up to
//! isomorphism, and each distinct molecule reduced under the default and
//! many random tie-break policies, in both scan modes.
//!
//! A single splicing pass can create a new double-bond chain (first seen
//! at order 6), so the sweep also repeats the pass until nothing splices
//! and judges the bounds on that result.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::phi::verify_phi;
use super::run::{run_algorithm, Mode, RunOptions, Scan, TieBreak};
use super::verify::check_count_identities;
use crate::combinatorics::{enumerate_couples, Couple, Diagram};
use crate::error::Result;
use crate::molecules::{build_molecule, canonical_form_marked, Molecule};
use crate::splice::{preprocess, preprocess_fixpoint};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepConfig {
    pub max_order: usize,
    pub policies: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// Results over one set of distinct molecules.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepPart {
    /// Molecules excluded by the strict assumptions, by reason.
    pub excluded: BTreeMap<String, u64>,
    pub distinct_molecules: usize,
    pub runs: u64,
    pub saturated_molecules: usize,
    /// Molecules whose jump-table trace differs from the priority trace
    /// under some policy.
    pub goto_mismatches: usize,
    pub violations: u64,
    /// Molecules with at least one violation.
    pub failing_molecules: usize,
    /// First few violation messages.
    pub examples: Vec<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepReport {
    pub couples: BTreeMap<usize, u64>,
    pub spliced: u64,
    /// Couples for which a second splicing pass still finds a splice set.
    pub second_pass_couples: u64,
    /// Preprocessing repeated until nothing splices; decides `pass`.
    pub fixpoint: SweepPart,
    /// A single preprocessing pass.
    pub single_pass: SweepPart,
    pub seconds: f64,
    pub pass: bool,
}

const KEEP: usize = 20;

/// Reason a molecule falls outside strict mode, if any.
pub fn strict_exclusion(m: &Molecule) -> Option<&'static str> {
    if m.components().len() != 1 {
        return Some("disconnected");
    }
    if m.bonds.iter().any(|b| b.is_loop()) {
        return Some("selfConnectingBond");
    }
    let degs: Vec<usize> = (0..m.atom_count()).map(|v| m.degree(v)).collect();
    if degs.iter().filter(|&&d| d == 3).count() != 2 || degs.iter().any(|&d| d != 3 && d != 4) {
        return Some("degreeSequence");
    }
    None
}

/// Seed of random policy `i`.
fn policy_seed(base: u64, i: usize) -> u64 {
    base ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Outcome {
    runs: u64,
    saturated: bool,
    mismatch: bool,
    violations: Vec<String>,
}

fn check_molecule(m: &Molecule, fully_degenerate: &BTreeSet<u32>, cfg: &SweepConfig) -> Outcome {
    let mut out = Outcome { runs: 0, saturated: false, mismatch: false, violations: Vec::new() };
    let strict = cfg.mode == Mode::Strict;
    let label = || {
        let e: Vec<(u32, u32)> = m.bonds.iter().map(|b| (m.atoms[b.from].id, m.atoms[b.to].id)).collect();
        format!("molecule {e:?}")
    };
    let policies = std::iter::once(TieBreak::LowestId).chain((0..cfg.policies).map(|i| TieBreak::Random(policy_seed(cfg.seed, i))));
    for tb in policies {
        let opts = RunOptions { mode: cfg.mode, tie_break: tb, fully_degenerate: fully_degenerate.clone(), ..Default::default() };
        let run = match run_algorithm(m, &opts) {
            Ok(r) => r,
            Err(e) => {
                out.violations.push(format!("{}: {tb:?}: {e}", label()));
                continue;
            }
        };
        out.runs += 1;
        let ids = check_count_identities(&run.counts, run.n, strict);
        if !ids.pass {
            out.violations.push(format!("{}: {tb:?}: identities {:?}", label(), run.counts));
        }
        out.saturated |= ids.saturated;
        for v in &run.monitors {
            out.violations.push(format!("{}: {tb:?}: monitor {} at step {}: {}", label(), v.monitor, v.step, v.detail));
        }
        let phi = verify_phi(&run.tree);
        if !phi.pass {
            out.violations.push(format!("{}: {tb:?}: phi {:?}", label(), phi.violations));
        }
        let jump = run_algorithm(m, &RunOptions { scan: Scan::JumpTable, ..opts.clone() });
        if !jump.is_ok_and(|j| j.trace == run.trace) {
            out.mismatch = true;
        }
    }
    out
}

type Distinct = HashMap<Vec<u8>, (Molecule, BTreeSet<u32>)>;

fn admit(p: &Couple, cfg: &SweepConfig, part: &mut SweepPart, distinct: &mut Distinct) -> Result<()> {
    if p.order() == 0 {
        *part.excluded.entry("empty".into()).or_default() += 1;
        return Ok(());
    }
    let m = build_molecule(p)?;
    if cfg.mode == Mode::Strict {
        if let Some(why) = strict_exclusion(&m) {
            *part.excluded.entry(why.into()).or_default() += 1;
            return Ok(());
        }
    }
    // with one tree trivial, a degree-2 root of the other is fully
    // degenerate
    let (a, b) = p.tree_orders();
    let root = match (cfg.mode, a, b) {
        (Mode::Relaxed, 0, _) => Some(p.roots()[1]),
        (Mode::Relaxed, _, 0) => Some(p.roots()[0]),
        _ => None,
    };
    let marks: Vec<u8> =
        (0..m.atom_count()).map(|v| u8::from(root.is_some() && m.atoms[v].node == root && m.degree(v) == 2)).collect();
    let key = canonical_form_marked(&m, &marks)?;
    distinct.entry(key).or_insert_with(|| {
        let flagged = m.atoms.iter().zip(&marks).filter(|(_, &k)| k == 1).map(|(x, _)| x.id).collect();
        (m, flagged)
    });
    Ok(())
}

fn check_all(distinct: Distinct, cfg: &SweepConfig, part: &mut SweepPart) {
    let mut mols: Vec<(Vec<u8>, (Molecule, BTreeSet<u32>))> = distinct.into_iter().collect();
    mols.sort_by(|a, b| a.0.cmp(&b.0));
    part.distinct_molecules = mols.len();
    let outcomes: Vec<Outcome> = mols.par_iter().map(|(_, (m, f))| check_molecule(m, f, cfg)).collect();
    for o in outcomes {
        part.runs += o.runs;
        part.saturated_molecules += o.saturated as usize;
        part.goto_mismatches += o.mismatch as usize;
        part.violations += o.violations.len() as u64;
        part.failing_molecules += usize::from(!o.violations.is_empty());
        for v in o.violations {
            if part.examples.len() < KEEP {
                part.examples.push(v);
            }
        }
    }
}

/// Enumerate, preprocess, deduplicate and check, both after one splicing
/// pass and after repeating it until nothing splices. Violations are
/// reported, not raised.
pub fn exhaustive_bound_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let t0 = Instant::now();
    let mut rep = SweepReport::default();
    let mut single = Distinct::new();
    let mut fixed = Distinct::new();
    for n in 1..=cfg.max_order {
        let mut count = 0u64;
        for c in enumerate_couples(n)? {
            count += 1;
            let p = preprocess(&c)?;
            admit(&p, cfg, &mut rep.single_pass, &mut single)?;
            if p.order() < c.order() {
                rep.spliced += 1;
                let (q, passes) = preprocess_fixpoint(&p)?;
                if passes > 0 {
                    rep.second_pass_couples += 1;
                }
                admit(&q, cfg, &mut rep.fixpoint, &mut fixed)?;
            } else {
                admit(&p, cfg, &mut rep.fixpoint, &mut fixed)?;
            }
        }
        rep.couples.insert(n, count);
    }
    check_all(single, cfg, &mut rep.single_pass);
    check_all(fixed, cfg, &mut rep.fixpoint);
    rep.seconds = t0.elapsed().as_secs_f64();
    rep.pass = rep.fixpoint.violations == 0;
    Ok(rep)
}
