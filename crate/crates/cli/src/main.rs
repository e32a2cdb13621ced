//! `gbbm-kam`: small-divisor surveys, partial Birkhoff normal forms,
//! frequency-map nondegeneracy checks, and the spectral frequency-shift
//! experiment, each behind one subcommand emitting deterministic JSON
//! (or CSV for time series).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbbm_kam::Error;

const EXIT_CODE_HELP: &str = "Exit codes:
  0  success
  2  configuration, schema, or input errors
  3  resource ceiling exceeded
  4  verification failure
  5  numerical non-convergence";

#[derive(Parser)]
#[command(name = "gbbm-kam", version, about, after_help = EXIT_CODE_HELP)]
struct Cli {
    /// Worker threads for parallel sections (enumeration, grids,
    /// sweeps); GBBM_KAM_THREADS is the fallback, the default is one
    /// thread per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survey the small divisors of one order's admissible strata.
    Divisors(DivisorsArgs),
    /// Build the order-6 decomposition and the order-10/14 ladders.
    Normalform(NormalformArgs),
    /// Tabulate the frequency maps and run the nondegeneracy suite.
    Freqmap(FreqmapArgs),
    /// Integrate the spectral flow and emit the sampled trajectory CSV.
    Simulate(SimulateArgs),
    /// Extract tones from a trajectory CSV and compare to predictions.
    Analyze(AnalyzeArgs),
    /// Run the verification suite; nonzero exit on any failing criterion.
    #[command(name = "verify-all")]
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON parameter file (validated against the published schema).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print this subcommand's JSON schema and exit.
    #[arg(long)]
    schema: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DivisorsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Hamiltonian order to survey: 6, 10 or 14.
    #[arg(long)]
    order: Option<usize>,
    /// First tangential mode (0 < n1 < n2).
    #[arg(long)]
    n1: Option<i64>,
    /// Second tangential mode.
    #[arg(long)]
    n2: Option<i64>,
    /// Window bound for non-tangential entries.
    #[arg(long = "jmax")]
    j_max: Option<usize>,
    /// Abort if the enumeration would exceed this many tuples.
    #[arg(long)]
    ceiling: Option<u64>,
}

#[derive(Args)]
struct NormalformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First tangential mode (0 < n1 < n2).
    #[arg(long)]
    n1: Option<i64>,
    /// Second tangential mode.
    #[arg(long)]
    n2: Option<i64>,
    /// Band limit for normal modes (default 5·n2).
    #[arg(long = "jmax")]
    j_max: Option<usize>,
    /// Abort if the term count would exceed this ceiling.
    #[arg(long)]
    ceiling: Option<u64>,
}

#[derive(Args)]
struct FreqmapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First tangential mode (0 < n1 < n2).
    #[arg(long)]
    n1: Option<i64>,
    /// Second tangential mode.
    #[arg(long)]
    n2: Option<i64>,
    /// Scale parameter ε fixing O* = [√ε, 4√ε]².
    #[arg(long)]
    epsilon: Option<f64>,
    /// Band limit for the normal-form inputs (default 5·n2).
    #[arg(long = "jmax")]
    j_max: Option<usize>,
    /// Normal modes entering the derivative bounds (default 3·n2).
    #[arg(long = "jmax-check")]
    j_max_check: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First tangential mode (0 < n1 < n2).
    #[arg(long)]
    n1: Option<i64>,
    /// Second tangential mode.
    #[arg(long)]
    n2: Option<i64>,
    /// Initial action of the first tangential mode.
    #[arg(long)]
    xi1: Option<f64>,
    /// Initial action of the second tangential mode.
    #[arg(long)]
    xi2: Option<f64>,
    /// Initial angle of the first tangential mode (default 0).
    #[arg(long)]
    phase1: Option<f64>,
    /// Initial angle of the second tangential mode (default 0).
    #[arg(long)]
    phase2: Option<f64>,
    /// Spectral truncation: keep modes with |j| ≤ jmax (default 5·n2).
    #[arg(long = "jmax")]
    j_max: Option<usize>,
    /// Synthesis/analysis grid size (≥ 4·jmax).
    #[arg(long)]
    m: Option<usize>,
    /// Time step (dt·max|λ_j| must stay ≤ 0.1, i.e. dt ≤ 0.2).
    #[arg(long)]
    dt: Option<f64>,
    /// Integration horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Keep every k-th step in the sampled output.
    #[arg(long = "stride")]
    sample_stride: Option<usize>,
    /// midpoint | splitting
    #[arg(long, value_parser = commands::parse_integrator)]
    integrator: Option<gbbm_kam::dynamics::IntegratorKind>,
    /// Integrate the linearized flow only.
    #[arg(long)]
    linear: bool,
    /// Write a JSON run summary here as well.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trajectory CSV produced by `simulate`.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Tones to extract per tangential series.
    #[arg(long)]
    count: Option<usize>,
    /// First tangential mode for the prediction columns (give all of
    /// --n1/--n2/--xi1/--xi2, or none to skip predictions).
    #[arg(long)]
    n1: Option<i64>,
    /// Second tangential mode for the prediction columns.
    #[arg(long)]
    n2: Option<i64>,
    /// Action of the first tangential mode for the prediction.
    #[arg(long)]
    xi1: Option<f64>,
    /// Action of the second tangential mode for the prediction.
    #[arg(long)]
    xi2: Option<f64>,
    /// Band limit for the prediction's normal form (default 5·n2).
    #[arg(long = "jmax")]
    j_max: Option<usize>,
}

#[derive(Args)]
struct VerifyAllArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Criterion ids to run (e.g. --criteria 1,4,6); all by default.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => 2,
        Error::ResourceCeiling(_) => 3,
        Error::Verification(_) => 4,
        Error::NonConvergence(_) => 5,
    }
}

fn init_threads(flag: Option<usize>) -> gbbm_kam::Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("GBBM_KAM_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                Error::Config(format!("GBBM_KAM_THREADS must be a thread count, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = init_threads(cli.threads).and_then(|()| match cli.command {
        Command::Divisors(a) => commands::divisors(a),
        Command::Normalform(a) => commands::normalform(a),
        Command::Freqmap(a) => commands::freqmap(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::VerifyAll(a) => commands::verify_all(a),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
