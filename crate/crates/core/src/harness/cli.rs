//! `sagin simulate | validate | report`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

use super::{emit_csv, read_csv, render_report, run_experiment, Config, ExperimentKind};

#[derive(Debug, Parser)]
#[command(name = "sagin", about = "Satellite/HAP/terrestrial downlink planner and sweep runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sweep and write its rows as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = ["users", "happower"])]
        experiment: String,
        #[arg(long)]
        out: PathBuf,
        /// Run this single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated solver names.
        #[arg(long)]
        solvers: Option<String>,
    },
    /// Parse and check a config file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Summarise a CSV produced by `simulate`.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on a usage or validation error, 2 on an I/O error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn run(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Simulate { config, experiment, out, seed, solvers } => {
            let cfg = Config::load(&config)?;
            let mut spec = cfg.spec(ExperimentKind::parse(&experiment)?);
            if let Some(seed) = seed {
                spec.seeds = vec![seed];
            }
            if let Some(list) = solvers {
                spec.solvers = super::parse_solvers(&list)?;
            }
            let rows = run_experiment(&spec)?;
            emit_csv(&rows, &out)?;
            let failed = rows.iter().filter(|r| r.is_error()).count();
            println!("wrote {} rows ({failed} failed) to {}", rows.len(), out.display());
        }
        Command::Validate { config } => {
            Config::load(&config)?;
            println!("{}: ok", config.display());
        }
        Command::Report { input } => {
            print!("{}", render_report(&read_csv(&input)?));
        }
    }
    Ok(())
}
