//! `quench`: compile, run, and sample Trotterized spin-chain experiments.
//!
//! Exit codes: 0 success, 2 config error, 3 infeasible selection or layout,
//! 4 internal invariant violation.

use clap::{Args, Parser, Subcommand};
use quench_cli::config::ExperimentConfig;
use quench_cli::runner::{
    run_echo, run_ghz_mermin, run_quench, run_select, run_synth_check, RunError,
};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "quench", version, about = "Spin-chain quench experiment runner")]
struct Cli {
    /// Worker threads (default: all cores). Results are identical either way.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time-grid quench run: magnetization, correlators, QFI, and friends.
    Run(RunArgs),
    /// GHZ preparation and the Mermin witness.
    GhzMermin(RunArgs),
    /// Forward-then-inverse evolution return probability.
    Echo(RunArgs),
    /// Pick the best qubit chain from a calibration document.
    SelectQubits(RunArgs),
    /// Fuzz the two-qubit synthesis against its closed-form target.
    SynthCheck(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides [output] in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for the sampling section.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Random angle triples (and pairs) to test.
    #[arg(long, default_value_t = 1000)]
    samples: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn deliver(args: &RunArgs, config: &ExperimentConfig, text: String) -> Result<(), RunError> {
    let path = match (&args.out, &config.output) {
        (Some(path), _) => Some(path.clone()),
        (None, Some(section)) => Some(section.path.clone()),
        (None, None) => None,
    };
    match path {
        Some(path) => std::fs::write(&path, &text).map_err(|e| {
            RunError::Internal(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(command: &Command) -> Result<(), RunError> {
    let load = |args: &RunArgs| -> Result<(ExperimentConfig, PathBuf), RunError> {
        let config = ExperimentConfig::load(&args.config)?;
        let dir = args
            .config
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        Ok((config, dir))
    };
    match command {
        Command::Run(args) => {
            let (config, dir) = load(args)?;
            let text = run_quench(&config, &dir, args.seed)?;
            deliver(args, &config, text)
        }
        Command::GhzMermin(args) => {
            let (config, dir) = load(args)?;
            let text = run_ghz_mermin(&config, &dir, args.seed)?;
            deliver(args, &config, text)
        }
        Command::Echo(args) => {
            let (config, dir) = load(args)?;
            let text = run_echo(&config, &dir, args.seed)?;
            deliver(args, &config, text)
        }
        Command::SelectQubits(args) => {
            let (config, dir) = load(args)?;
            let text = run_select(&config, &dir)?;
            deliver(args, &config, text)
        }
        Command::SynthCheck(args) => {
            let report = run_synth_check(args.samples, args.seed)?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("internal error: cannot size thread pool: {e}");
            std::process::exit(4);
        }
    }
    if let Err(error) = dispatch(&cli.command) {
        eprintln!("{error}");
        std::process::exit(error.exit_code());
    }
}
