//! Command-line front end.
//!
//! Exit codes: 0 success (warnings allowed), 1 input or configuration error,
//! 2 warnings under `--strict`, 3 sampler abort.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{cmd_check, cmd_fit, cmd_simulate, cmd_stats, cmd_summarize, provenance};
pub use config::{RunConfig, TruthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_STRICT: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nbcar", version, about = "Negative-binomial CAR models of zone-level crash counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 2 when any warning was emitted.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model and write summary, draws and diagnostics files.
    Fit {
        #[arg(long)]
        zones: PathBuf,
        #[arg(long)]
        adjacency: PathBuf,
        /// Directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic region with known parameters.
    Simulate {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        trim: Option<usize>,
        #[arg(long)]
        zero_arterial: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Recompute the posterior summary from a draws file.
    Summarize {
        draws: PathBuf,
        /// Write the CSV here and print the table to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Descriptive statistics of a zone file.
    Stats {
        zones: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Validate inputs and report warnings without fitting.
    Check {
        zones: PathBuf,
        adjacency: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Fit { common, .. }
            | Command::Simulate { common, .. }
            | Command::Summarize { common, .. }
            | Command::Stats { common, .. }
            | Command::Check { common, .. } => common,
        }
    }
}

/// Runs one command, reporting to stderr, and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let strict = cli.command.common().strict;
    let result = match &cli.command {
        Command::Fit { zones, adjacency, out_dir, common } => cmd_fit(zones, adjacency, out_dir, common),
        Command::Simulate { out_dir, rows, cols, trim, zero_arterial, common } => {
            cmd_simulate(out_dir, *rows, *cols, *trim, *zero_arterial, common)
        }
        Command::Summarize { draws, out, common } => cmd_summarize(draws, out.as_deref(), common),
        Command::Stats { zones, out, common } => cmd_stats(zones, out.as_deref(), common),
        Command::Check { zones, adjacency, common } => cmd_check(zones, adjacency, common),
    };
    match result {
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if strict && !warnings.is_empty() {
                eprintln!("error: {} warning(s) under --strict", warnings.len());
                EXIT_STRICT
            } else {
                EXIT_OK
            }
        }
        Err(e @ Error::SamplerAbort { .. }) => {
            eprintln!("error: {e}");
            EXIT_ABORT
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
