//! Command-line drivers for restarted APPROX.
//!
//! Subcommands:
//!
//! - `solve`: coordinate descent, APPROX or restarted APPROX on a LibSVM
//!   file or a synthetic instance; writes `summary.json`, `trace.csv` and
//!   `restarts.csv` to `--out`.
//! - `path`: Lasso regularization path with warm starts.
//! - `rates`: per-iteration rates of restarted APPROX and coordinate descent
//!   as a function of the restart period.
//! - `schedule`: prints restart periods.
//! - `gen`: writes a synthetic dataset.
//! - `schema`: prints the JSON schema of a summary file.
//!
//! Flags of `solve` and `path` can also come from a flat JSON file given by
//! `--config`, keyed by flag name; flags on the command line win.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod model;
pub mod options;
pub mod path;
pub mod solve;
pub mod summary;
pub mod tools;

pub use options::{load_config, PathConfig, RunConfig, RunOptions, PathOptions, UsageError};
pub use path::cmd_path;
pub use solve::cmd_solve;
pub use tools::{cmd_gen, cmd_rates, cmd_schedule};

#[derive(Debug, Parser)]
#[command(name = "approx", version, about = "Restarted accelerated coordinate descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem
    Solve(SolveArgs),
    /// Lasso regularization path
    Path(PathArgs),
    /// Rate table over restart periods
    Rates(tools::RatesArgs),
    /// Print restart periods
    Schedule(tools::ScheduleArgs),
    /// Generate a synthetic dataset
    Gen(tools::GenArgs),
    /// Print the JSON schema of a summary
    Schema(SchemaArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON file with default flag values
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOptions,
    #[command(flatten)]
    pub path: PathOptions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemaKind {
    Solve,
    Path,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    #[arg(value_enum)]
    pub kind: SchemaKind,
}

impl SolveArgs {
    pub fn resolve(self) -> Result<RunConfig> {
        let run = match &self.config {
            Some(file) => self.run.merge(load_config(file, false)?.0),
            None => self.run,
        };
        RunConfig::resolve(run)
    }
}

impl PathArgs {
    pub fn resolve(self) -> Result<PathConfig> {
        let (run, path) = match &self.config {
            Some(file) => {
                let (r, p) = load_config(file, true)?;
                (self.run.merge(r), self.path.merge(p))
            }
            None => (self.run, self.path),
        };
        PathConfig::resolve(run, path)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Runs one parsed command line. Summaries go to stdout unless `--out` is
/// given.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = args.resolve()?;
            let summary = cmd_solve(&cfg)?;
            if cfg.out.is_none() {
                print_json(&summary)?;
            }
        }
        Command::Path(args) => {
            let cfg = args.resolve()?;
            let summary = cmd_path(&cfg)?;
            if cfg.run.out.is_none() {
                print_json(&summary)?;
            }
        }
        Command::Rates(args) => {
            let report = cmd_rates(&args)?;
            match report.window_bound {
                Some((lo, hi)) => eprintln!("restarted bound beats coordinate descent for K in [{lo}, {hi}]"),
                None => eprintln!("restarted bound never beats coordinate descent on this grid"),
            }
        }
        Command::Schedule(args) => {
            let periods = cmd_schedule(&args)?;
            let text: Vec<String> = periods.iter().map(|k| k.to_string()).collect();
            println!("{}", text.join(" "));
        }
        Command::Gen(args) => {
            cmd_gen(&args)?;
        }
        Command::Schema(args) => match args.kind {
            SchemaKind::Solve => print_json(&summary::solve_schema())?,
            SchemaKind::Path => print_json(&summary::path_schema())?,
        },
    }
    Ok(())
}

/// 2 for configuration errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let usage = err.chain().any(|e| {
        e.downcast_ref::<UsageError>().is_some()
            || matches!(
                e.downcast_ref::<restarted_approx::Error>(),
                Some(restarted_approx::Error::InvalidArgument(_))
            )
    });
    if usage {
        2
    } else {
        1
    }
}
