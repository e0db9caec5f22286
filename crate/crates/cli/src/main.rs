use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use cmlwealth_cli::{parse_config_with, run, Command};

/// Coupled-map lattice wealth model: simulation, sweeps and regime maps.
///
/// Settings come from the TOML file given by --config; the flags below
/// override it.
#[derive(Parser)]
#[command(name = "cmlwealth", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// TOML configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output path prefix
    #[arg(long, global = true, value_name = "PREFIX")]
    out: Option<String>,

    /// Master seed
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads (0: all processors)
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Overwrite existing output files
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Evolve one lattice; write snapshots and a (t, H, sigma, gini) series
    Simulate,
    /// Classify every (a, r) cell of a grid for one topology
    Sweep,
    /// Sweep two topologies and mark cells that go from Pareto to BG
    Transition,
    /// Gini against a at fixed r for several topologies
    GiniCurve,
    /// Run the built-in correctness checks
    Selftest,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Simulate => Command::Simulate,
            Sub::Sweep => Command::Sweep,
            Sub::Transition => Command::Transition,
            Sub::GiniCurve => Command::GiniCurve,
            Sub::Selftest => Command::Selftest,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config_with(&text, Some(cli.command.into()))?;
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.protocol.master_seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    cfg.force |= cli.force;
    run(&cfg, &mut std::io::stdout())
}
