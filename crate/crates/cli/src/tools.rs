//! `rates`, `schedule` and `gen`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use restarted_approx::data::{synth_lasso_correlated, synth_logistic, write_libsvm, Dataset};
use restarted_approx::rates::{
    advantage_window, figure1_table, log_spaced_grid, write_figure1_csv, Figure1Row, RateKind,
    StandardCdRate,
};

use crate::options::{usage, ModelKind, ScheduleSpec};

#[derive(Debug, Clone, Args)]
pub struct RatesArgs {
    /// Strong convexity constant in the ESO norm
    #[arg(long, default_value_t = 1e-3)]
    pub mu: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    /// Explicit restart periods, comma separated (overrides the log grid)
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<u64>>,
    #[arg(long, default_value_t = 1)]
    pub kmin: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub kmax: u64,
    /// Grid points per decade
    #[arg(long, default_value_t = 40)]
    pub per_decade: usize,
    /// CSV output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RatesReport {
    pub rows: Vec<Figure1Row>,
    /// Periods where the restarted bound beats coordinate descent.
    pub window_bound: Option<(u64, u64)>,
    pub window_exact: Option<(u64, u64)>,
}

pub fn cmd_rates(args: &RatesArgs) -> Result<RatesReport> {
    if args.tau == 0 || args.tau >= args.n {
        return Err(usage(format!("rates need 1 <= tau < n, got tau = {}, n = {}", args.tau, args.n)));
    }
    let grid = match &args.k_grid {
        Some(g) if g.is_empty() || g.contains(&0) => {
            return Err(usage("--k-grid entries must be positive"));
        }
        Some(g) => g.clone(),
        None => {
            if args.kmin == 0 || args.kmax < args.kmin || args.per_decade == 0 {
                return Err(usage("need 1 <= kmin <= kmax and per-decade >= 1"));
            }
            log_spaced_grid(args.kmin, args.kmax, args.per_decade)
        }
    };
    let rows = figure1_table(args.mu, args.n, args.tau, &grid, &StandardCdRate)?;
    let report = RatesReport {
        window_bound: advantage_window(&rows, RateKind::Bound),
        window_exact: advantage_window(&rows, RateKind::Exact),
        rows,
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_figure1_csv(&report.rows, BufWriter::new(file))?;
        }
        None => write_figure1_csv(&report.rows, std::io::stdout().lock())?,
    }
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// fixed:K | variable:K0 | loggrid:N | explicit:K1,K2,...
    pub spec: String,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    /// Stop using period 2^j K0 after (j + 1) L restarts
    #[arg(long)]
    pub truncate: Option<u64>,
}

/// The first `count` periods of a schedule.
pub fn cmd_schedule(args: &ScheduleArgs) -> Result<Vec<u64>> {
    let spec = ScheduleSpec::parse(&args.spec)?;
    if matches!(spec, ScheduleSpec::Variable(None) | ScheduleSpec::FixedAuto) {
        return Err(usage("give the schedule parameter explicitly, e.g. variable:10"));
    }
    let schedule = spec.build(1.0, None, args.truncate)?;
    Ok(schedule.periods().take(args.count).collect())
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "lasso")]
    pub model: ModelKind,
    /// Number of features
    #[arg(long)]
    pub n: usize,
    /// Number of samples
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Correlation shared by all features (lasso only)
    #[arg(long, default_value_t = 0.0)]
    pub correlation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// LibSVM output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_gen(args: &GenArgs) -> Result<Dataset> {
    let inst = match args.model {
        ModelKind::Lasso => {
            synth_lasso_correlated(args.n, args.m, args.density, args.noise, args.correlation, args.seed)?
        }
        ModelKind::Logreg if args.correlation != 0.0 => {
            return Err(usage("--correlation applies to lasso data only"));
        }
        ModelKind::Logreg => synth_logistic(args.n, args.m, args.density, args.noise, args.seed)?,
        ModelKind::Quadratic => return Err(usage("gen writes lasso or logreg datasets")),
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_libsvm(&inst.dataset, &mut w)?;
            w.flush()?;
        }
        None => write_libsvm(&inst.dataset, std::io::stdout().lock())?,
    }
    Ok(inst.dataset)
}
