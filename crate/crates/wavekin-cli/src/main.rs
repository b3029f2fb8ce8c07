//! `wavekin`: command-line front end for the wave-kinetics toolkit.
//!
//! Every subcommand writes its artifacts plus a `manifest.json` into
//! `--out`. Exit status: 0 success, 1 usage or runtime error, 2 violation
//! of a theory-derived invariant.

mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "wavekin", version, about = "Diagram combinatorics, lattice counting and ensemble simulation")]
struct Cli {
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parallel modules (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Enumerate couples by order and check the closed-form counts.
    Enumerate(EnumerateArgs),
    /// Build the molecule of a couple and report its structure.
    Molecule(MoleculeArgs),
    /// Preprocess a couple by splicing, or check the twist-sum factorization.
    Splice(SpliceArgs),
    /// Run the reduction algorithm on a molecule.
    Algorithm(AlgorithmArgs),
    /// Run an exhaustive verification suite.
    Verify(VerifyArgs),
    /// Count lattice solutions of one counting problem.
    Count(CountArgs),
    /// Evaluate the collision kernel on a grid.
    Kernel(KernelArgs),
    /// Evaluate the second-order correlation on the lattice.
    K2(K2Args),
    /// Run an ensemble simulation from a TOML config.
    Simulate(SimulateArgs),
    /// Aggregate CSV artifacts into summary tables.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub order: usize,
    /// Also write every couple of the top order as JSON lines.
    #[arg(long)]
    pub list: bool,
}

#[derive(Args, Debug)]
pub struct MoleculeArgs {
    /// Couple JSON file.
    #[arg(long, conflicts_with = "fixture")]
    pub couple: Option<PathBuf>,
    /// Built-in couple: `five-atom`.
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Args, Debug)]
pub struct SpliceArgs {
    /// Couple JSON file to preprocess.
    #[arg(long, conflicts_with = "fixture")]
    pub couple: Option<PathBuf>,
    /// Built-in couple: `irregular:<q>`.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Repeat the splicing pass until nothing splices.
    #[arg(long)]
    pub fixpoint: bool,
    /// Random twist-sum factorization checks instead of preprocessing.
    #[arg(long)]
    pub twist_sum_samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct AlgorithmArgs {
    /// Molecule JSON file.
    #[arg(long, conflicts_with = "fixture")]
    pub molecule: Option<PathBuf>,
    /// Built-in molecule: `ladder:<r>`.
    #[arg(long)]
    pub fixture: Option<String>,
    /// `lowest-id` or `random:<seed>`.
    #[arg(long, default_value = "lowest-id")]
    pub tie_break: String,
    #[arg(long)]
    pub relaxed: bool,
    /// Resume the scan at each operation's jump target.
    #[arg(long)]
    pub jump_table: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `identities`, `bounds`, `five-vector` or `twist-sum`.
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 5)]
    pub max_order: usize,
    /// Random tie-break policies per molecule in the identity sweep.
    #[arg(long, default_value_t = 50)]
    pub policies: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Signed indices, e.g. `1+,2-,3+`.
    #[arg(long)]
    pub tuple: String,
    #[arg(long, default_value_t = 0)]
    pub k: i64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long = "L")]
    pub l: i64,
    #[arg(long = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    /// Box centres, one per index (default all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub centers: Vec<f64>,
    /// Skip the size-rule precondition.
    #[arg(long)]
    pub unchecked: bool,
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long)]
    pub sigma: f64,
    /// `gaussian` or `gaussian:<amplitude>:<width>`.
    #[arg(long, default_value = "gaussian")]
    pub spectrum: String,
    #[arg(long, default_value = "-8:8:0.25", allow_hyphen_values = true)]
    pub xi_grid: String,
    /// Also check mass and energy conservation.
    #[arg(long)]
    pub conservation: bool,
}

#[derive(Args, Debug)]
pub struct K2Args {
    #[arg(long = "L")]
    pub l: i64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, conflicts_with = "gamma")]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Defaults to the edge of the theorem window.
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value = "gaussian")]
    pub spectrum: String,
    /// Wavenumbers `lo:hi:step`; each must lie on the lattice.
    #[arg(long, default_value = "0:2:0.25", allow_hyphen_values = true)]
    pub k_grid: String,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub members: Option<usize>,
    #[arg(long)]
    pub seed_base: Option<u64>,
    #[arg(long = "L")]
    pub l: Option<i64>,
    /// Largest |k| in the theorem comparison.
    #[arg(long, default_value_t = 4.0)]
    pub k_max: f64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// CSV artifacts to aggregate.
    pub inputs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: cannot set up {} workers: {e}", cli.jobs);
            return ExitCode::from(1);
        }
    }
    match commands::dispatch(&cli.cmd, &cli.out, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_violation() { 2 } else { 1 })
        }
    }
}
