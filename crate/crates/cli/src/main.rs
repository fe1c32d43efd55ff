//! Command-line front end for the barrier-tunneling propagators.
//!
//! Every subcommand reads one TOML configuration (a file via --config or a
//! built-in via --preset), applies the --seed and --out overrides, and
//! writes its results into an output directory stamped with a hash of the
//! physics configuration. Re-running the same configuration and seed
//! reproduces every CSV byte for byte regardless of --threads; a directory
//! holding results for a *different* configuration is refused unless
//! --force is given. Failures exit nonzero with a one-line JSON error
//! record on stderr.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{Overrides, Preset};

#[derive(Parser)]
#[command(name = "ehk", version, about = "Semiclassical tunneling through one-dimensional barriers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate complex-plane classical orbits and the barrier geometry
    Atlas(RunArgs),
    /// Cross-correlation of the two packets under the configured propagator
    Correlate(RunArgs),
    /// Correlation chained into transmission curves, one per method
    Transmit(RunArgs),
    /// Barrier action, tunnel factor, and uniform transmission per energy
    Wkb(RunArgs),
    /// Grid-reference correlation plus a final-state checkpoint
    Oracle(RunArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Atlas(a) => ("atlas", a),
            Command::Correlate(a) => ("correlate", a),
            Command::Transmit(a) => ("transmit", a),
            Command::Wkb(a) => ("wkb", a),
            Command::Oracle(a) => ("oracle", a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory; overrides [output] dir
    #[arg(long, value_name = "DIR", env = "EHK_OUT")]
    out: Option<PathBuf>,
    /// Ensemble seed; overrides sampling.seed
    #[arg(long, env = "EHK_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: one per core)
    #[arg(long, env = "EHK_THREADS")]
    threads: Option<usize>,
    /// Replace results computed from a different configuration
    #[arg(long, env = "EHK_FORCE")]
    force: bool,
}

/// Exactly one configuration source.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// TOML configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Built-in configuration
    #[arg(long, value_enum, value_name = "NAME")]
    preset: Option<Preset>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        let record = error::error_record(&err);
        eprintln!(
            "{}",
            serde_json::to_string(&record).expect("error records serialize")
        );
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (_, args) = cli.command.split();
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("sizing the worker pool")?;
    }

    let (text, origin) = config::load_source(args.source.config.as_deref(), args.source.preset)?;
    let overrides = Overrides {
        seed: args.seed,
        out: args.out.clone(),
    };
    let resolved = config::resolve(&text, &origin, &overrides)?;

    let scale = resolved.config.barrier_scale();
    if scale < 5.0 {
        eprintln!(
            "warning: barrier scale m V0 l^2 / hbar^2 = {scale:.2} is below 5; \
             semiclassical propagation is unreliable this deep in the quantum regime"
        );
    }

    match &cli.command {
        Command::Atlas(_) => commands::atlas::run(&resolved, args.force),
        Command::Correlate(_) => commands::correlate::run(&resolved, args.force),
        Command::Transmit(_) => commands::transmit::run(&resolved, args.force),
        Command::Wkb(_) => commands::wkb::run(&resolved, args.force),
        Command::Oracle(_) => commands::oracle::run(&resolved, args.force),
    }
}
