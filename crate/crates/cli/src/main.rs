mod commands;
mod config;
mod error;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Ctx;
use config::FileConfig;
use error::{usage, CliError};
use out::OutDir;

const THREADS_ENV: &str = "EMOFLOW_THREADS";

/// Emotion-flow toolkit: tie-strength tables, exposure-based contagion
/// metrics, weighted spreading ensembles, burst-curve analysis, parameter
/// fitting, and synthetic corpora — all as plot-ready CSV/JSON files.
///
/// Every command is deterministic given its configuration and --seed:
/// reruns produce byte-identical outputs regardless of --threads. Flags
/// override config-file keys of the same name; the file is flat
/// `key = value` text with `#` comments.
#[derive(Parser, Debug)]
#[command(name = "emoflow", version, about, max_term_width = 100)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Global rng seed; per-run seeds derive from it by hashing, so
    /// ensembles stay reproducible under any parallelism.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// Worker threads (falls back to the EMOFLOW_THREADS env var, then to
    /// all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-emotion tie-strength tables from emotional retweets.
    Ties(commands::ties::TiesArgs),
    /// Exposure-based contagion significance and susceptibility split.
    Contagion(commands::contagion::ContagionArgs),
    /// Spreading ensembles over an (α, γ) grid.
    Simulate(commands::simulate::SimulateArgs),
    /// Burst markers and speed metrics for event curves.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Fit (α, γ) to event curves against a simulated grid.
    Fit(commands::fit::FitArgs),
    /// Generate a synthetic graph, tweet stream, and event tables.
    Synth(commands::synth::SynthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;

    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed: u64 = cfg.get(cli.seed, "seed", 0)?;
    let out_dir: PathBuf = cfg.get(cli.out, "out", PathBuf::from("out"))?;
    let ctx = Ctx {
        out: OutDir::new(&out_dir)?,
        cfg,
        seed,
    };

    match cli.command {
        Command::Ties(args) => commands::ties::run(args, &ctx),
        Command::Contagion(args) => commands::contagion::run(args, &ctx),
        Command::Simulate(args) => commands::simulate::run_cmd(args, &ctx),
        Command::Analyze(args) => commands::analyze::run(args, &ctx),
        Command::Fit(args) => commands::fit::run(args, &ctx),
        Command::Synth(args) => commands::synth::run(args, &ctx),
    }
}

/// Sizes the rayon pool from --threads or EMOFLOW_THREADS. Results never
/// depend on the pool size; only wall time does.
fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(raw) => Some(
                raw.parse::<usize>()
                    .map_err(|e| usage(format!("{THREADS_ENV}=`{raw}`: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    match n {
        None => Ok(()),
        Some(0) => Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Domain(format!("thread pool: {e}"))),
    }
}
