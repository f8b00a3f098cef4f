//! Command line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::commands;
use crate::{HarnessError, RunConfig};

/// Environment variable that takes precedence over `--threads`.
pub const THREADS_ENV: &str = "FERMIHART_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fermihart", version, about = "Stochastic mirror descent for finite-temperature Hartree problems")]
pub struct Cli {
    /// Override `run.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (FERMIHART_THREADS wins if set).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mirror descent run; writes metrics.csv, metrics.json and density dumps.
    Run { config: PathBuf },
    /// Dense self-consistent field solve; writes the reference density.
    Scf { config: PathBuf },
    /// Contour matvec error against the dense oracle for a range of pole counts.
    ContourCheck { config: PathBuf },
    /// Chemical potential grid search for `chempot.electrons`.
    MuScan { config: PathBuf },
    /// Average batch matvec time along a mirror descent trajectory.
    BenchMatvec { config: PathBuf },
}

impl Command {
    fn config(&self) -> &PathBuf {
        match self {
            Self::Run { config }
            | Self::Scf { config }
            | Self::ContourCheck { config }
            | Self::MuScan { config }
            | Self::BenchMatvec { config } => config,
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| HarnessError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(flag),
    }
}

fn print<T: Serialize>(value: &T) -> Result<(), HarnessError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Runs one parsed command line.
pub fn execute(cli: Cli) -> Result<(), HarnessError> {
    if let Some(threads) = thread_count(cli.threads)? {
        // A second initialization (tests calling in-process) keeps the first pool.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let mut cfg = RunConfig::load(cli.command.config())?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.directory = out;
    }
    let out = cfg.output.directory.clone();
    let out = Some(out.as_path());
    match cli.command {
        Command::Run { .. } => print(&commands::run(&cfg, out)?),
        Command::Scf { .. } => print(&commands::scf(&cfg, out)?),
        Command::ContourCheck { .. } => {
            let rows = commands::contour_check(&cfg, out)?;
            println!("{:>7} {:>14} {:>14} {:>14}", "n_poles", "median_rel", "max_rel", "scalar");
            for r in &rows {
                println!(
                    "{:>7} {:>14.4e} {:>14.4e} {:>14.4e}",
                    r.n_poles, r.median_rel_error, r.max_rel_error, r.scalar_error
                );
            }
            Ok(())
        }
        Command::MuScan { .. } => print(&commands::mu_scan(&cfg, out)?),
        Command::BenchMatvec { .. } => print(&commands::bench_matvec(&cfg, out)?),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
