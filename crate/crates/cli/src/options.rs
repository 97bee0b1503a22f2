//! Command-line flags, JSON config files and their resolution into run
//! configurations.

use std::collections::BTreeSet;
use std::f64::consts::E;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use restarted_approx::problems::ErrorBound;
use restarted_approx::restart::{RestartPolicy, RestartSchedule};
use serde::{Deserialize, Serialize};

/// A configuration error; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lasso,
    Logreg,
    Quadratic,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Lasso => "lasso",
            ModelKind::Logreg => "logreg",
            ModelKind::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Randomized proximal coordinate descent
    Cd,
    /// APPROX without restarts
    Approx,
    /// Restarted APPROX
    ApproxRestart,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Cd => "cd",
            Algorithm::Approx => "approx",
            Algorithm::ApproxRestart => "approx-restart",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    /// Always restart from the last iterate
    Plain,
    /// Keep the previous point when the objective went up
    Decrease,
}

impl PolicyKind {
    pub fn policy(self) -> RestartPolicy {
        match self {
            PolicyKind::Plain => RestartPolicy::PLAIN,
            PolicyKind::Decrease => RestartPolicy::DECREASE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Plain => "plain",
            PolicyKind::Decrease => "decrease",
        }
    }
}

/// Flags shared by `solve` and `path`. Every field is optional so that a
/// JSON config file can fill the gaps; flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct RunOptions {
    /// LibSVM data file
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Regularization weight (lambda for lasso and quadratic, lambda1 for logreg)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Lasso regularization as a fraction of lambda_max
    #[arg(long, conflicts_with = "lambda")]
    pub lambda_ratio: Option<f64>,
    /// Scale columns to unit norm
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    /// Center columns (implies --normalize)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub center: Option<bool>,

    /// Synthetic instance: number of features
    #[arg(long)]
    pub gen_n: Option<usize>,
    /// Synthetic instance: number of samples
    #[arg(long)]
    pub gen_m: Option<usize>,
    #[arg(long)]
    pub gen_density: Option<f64>,
    #[arg(long)]
    pub gen_noise: Option<f64>,
    /// Synthetic lasso: correlation shared by all features, in [0, 1)
    #[arg(long)]
    pub gen_correlation: Option<f64>,
    #[arg(long)]
    pub gen_seed: Option<u64>,
    /// Synthetic quadratic: smallest eigenvalue
    #[arg(long)]
    pub gen_mu: Option<f64>,

    #[arg(long, value_enum)]
    pub algorithm: Option<Algorithm>,
    /// Coordinates updated per iteration
    #[arg(long)]
    pub tau: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// fixed:K | fixed:auto | variable[:K0] | loggrid:N | explicit:K1,K2,...
    #[arg(long)]
    pub schedule: Option<String>,
    /// Stop using period 2^j K0 after (j + 1) L restarts (variable schedule)
    #[arg(long)]
    pub truncate: Option<u64>,
    /// Error bound constant in the ESO norm, for fixed:auto
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Duality gap tolerance
    #[arg(long)]
    pub eps: Option<f64>,
    /// Maximum coordinate updates (per run, or per lambda for `path`)
    #[arg(long)]
    pub budget: Option<u64>,
    /// Iterations for `--algorithm approx`
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Iterations between trace records (default: one epoch)
    #[arg(long)]
    pub trace_stride: Option<u64>,
    /// Independent runs with seeds seed, seed + 1, ...
    #[arg(long)]
    pub runs: Option<usize>,
    /// Worker threads for independent runs
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Extra flags of `path`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct PathOptions {
    /// Number of grid points
    #[arg(long)]
    pub points: Option<usize>,
    /// Ratio between the last and first lambda after `points` steps
    #[arg(long)]
    pub path_ratio: Option<f64>,
    /// Restarts between doublings of K0 (default: ceil(log2(1 / eps)))
    #[arg(long)]
    pub double_every: Option<u64>,
    /// Initial K0 in multiples of n
    #[arg(long)]
    pub k0_epochs: Option<u64>,
    /// Plain coordinate descent warm-up, in epochs
    #[arg(long)]
    pub warmup_epochs: Option<u64>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),* $(,)?) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.take(); } )*
    };
}

impl RunOptions {
    /// Fills unset fields from `file`.
    pub fn merge(mut self, mut file: RunOptions) -> Self {
        merge_fields!(self, file;
            data, model, lambda, lambda_ratio, normalize, center,
            gen_n, gen_m, gen_density, gen_noise, gen_correlation, gen_seed, gen_mu,
            algorithm, tau, seed, schedule, truncate, mu, policy, eps, budget,
            iterations, trace_stride, runs, jobs, out);
        if self.lambda.is_some() {
            self.lambda_ratio = None;
        }
        self
    }
}

impl PathOptions {
    pub fn merge(mut self, mut file: PathOptions) -> Self {
        merge_fields!(self, file; points, path_ratio, double_every, k0_epochs, warmup_epochs);
        self
    }
}

fn field_names<T: Serialize + Default>() -> BTreeSet<String> {
    match serde_json::to_value(T::default()) {
        Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
        _ => BTreeSet::new(),
    }
}

/// Reads a flat JSON object whose keys are flag names (`gen-n`, `eps`, ...).
pub fn load_config(path: &Path, with_path: bool) -> Result<(RunOptions, PathOptions)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(map) = &value else {
        return Err(usage(format!("{}: expected a JSON object", path.display())));
    };
    let mut known = field_names::<RunOptions>();
    if with_path {
        known.extend(field_names::<PathOptions>());
    }
    if let Some(bad) = map.keys().find(|k| !known.contains(*k)) {
        return Err(usage(format!("{}: unknown key '{bad}'", path.display())));
    }
    let run = serde_json::from_value(value.clone())
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let extra = if with_path {
        serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?
    } else {
        PathOptions::default()
    };
    Ok((run, extra))
}

/// Where the problem data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Synthetic { n: usize, m: usize, density: f64, noise: f64, correlation: f64, seed: u64, mu: f64 },
}

impl Source {
    pub fn describe(&self) -> String {
        match self {
            Source::File(p) => p.display().to_string(),
            Source::Synthetic { n, m, density, noise, correlation, seed, mu } => format!(
                "synthetic:n={n},m={m},density={density},noise={noise},correlation={correlation},seed={seed},mu={mu}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    Absolute(f64),
    RatioOfMax(f64),
}

/// Schedule request before `theta0` is known.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Fixed(u64),
    FixedAuto,
    Variable(Option<u64>),
    LogGrid(u64),
    Explicit(Vec<u64>),
}

impl ScheduleSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let int = |a: Option<&str>| -> Result<u64> {
            let a = a.ok_or_else(|| usage(format!("schedule '{s}' needs a parameter")))?;
            a.parse::<u64>()
                .ok()
                .filter(|&k| k > 0)
                .ok_or_else(|| usage(format!("schedule '{s}': '{a}' is not a positive integer")))
        };
        Ok(match kind {
            "fixed" if arg == Some("auto") => ScheduleSpec::FixedAuto,
            "fixed" => ScheduleSpec::Fixed(int(arg)?),
            "variable" => ScheduleSpec::Variable(arg.map(|_| int(arg)).transpose()?),
            "loggrid" => ScheduleSpec::LogGrid(int(arg)?),
            "explicit" => {
                let list = arg.ok_or_else(|| usage("explicit schedule needs a list"))?;
                let periods = list
                    .split(',')
                    .map(|p| int(Some(p.trim())))
                    .collect::<Result<Vec<_>>>()?;
                ScheduleSpec::Explicit(periods)
            }
            _ => return Err(usage(format!("unknown schedule '{s}'"))),
        })
    }

    /// `K0 = ceil(20 e / theta0)` when the variable schedule has no explicit
    /// base.
    pub fn build(&self, theta0: f64, mu: Option<f64>, truncate: Option<u64>) -> Result<RestartSchedule> {
        let schedule = match self {
            ScheduleSpec::Fixed(k) => RestartSchedule::fixed(*k)?,
            ScheduleSpec::FixedAuto => {
                let mu = mu.ok_or_else(|| usage("fixed:auto needs --mu"))?;
                RestartSchedule::fixed_optimal(ErrorBound::user(mu)?, theta0)?
            }
            ScheduleSpec::Variable(k0) => {
                let k0 = k0.unwrap_or_else(|| (20.0 * E / theta0).ceil() as u64);
                RestartSchedule::variable(k0)?
            }
            ScheduleSpec::LogGrid(n) => RestartSchedule::log_grid(*n)?,
            ScheduleSpec::Explicit(list) => RestartSchedule::explicit(list.clone())?,
        };
        match truncate {
            Some(l) => Ok(schedule.with_truncation(l)?),
            None => Ok(schedule),
        }
    }
}

/// Fully resolved options of one `solve` invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: Source,
    pub model: ModelKind,
    pub regularization: Regularization,
    pub normalize: bool,
    pub center: bool,
    pub algorithm: Algorithm,
    pub tau: usize,
    pub seed: u64,
    pub schedule: ScheduleSpec,
    pub truncate: Option<u64>,
    pub mu: Option<f64>,
    pub policy: PolicyKind,
    pub eps: f64,
    pub budget: Option<u64>,
    pub iterations: Option<u64>,
    pub trace_stride: Option<u64>,
    pub runs: usize,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_EPS: f64 = 1e-6;

impl RunConfig {
    pub fn resolve(o: RunOptions) -> Result<Self> {
        let synthetic = o.gen_n.is_some() || o.gen_m.is_some();
        let source = match (&o.data, synthetic) {
            (Some(_), true) => return Err(usage("give either --data or --gen-n/--gen-m, not both")),
            (Some(p), false) => Source::File(p.clone()),
            (None, true) => {
                let n = o.gen_n.ok_or_else(|| usage("synthetic data needs --gen-n"))?;
                let m = o.gen_m.unwrap_or(n);
                Source::Synthetic {
                    n,
                    m,
                    density: o.gen_density.unwrap_or(1.0),
                    noise: o.gen_noise.unwrap_or(0.1),
                    correlation: o.gen_correlation.unwrap_or(0.0),
                    seed: o.gen_seed.unwrap_or(0),
                    mu: o.gen_mu.unwrap_or(1e-2),
                }
            }
            (None, false) => return Err(usage("no problem source: give --data or --gen-n")),
        };
        let model = o.model.unwrap_or(ModelKind::Lasso);
        if matches!(source, Source::File(_)) && model == ModelKind::Quadratic {
            return Err(usage("the quadratic model is synthetic only"));
        }
        let regularization = match (o.lambda, o.lambda_ratio) {
            (Some(l), _) => Regularization::Absolute(l),
            (None, Some(r)) => Regularization::RatioOfMax(r),
            (None, None) if model == ModelKind::Quadratic => Regularization::Absolute(0.0),
            (None, None) => Regularization::RatioOfMax(0.1),
        };
        match regularization {
            Regularization::Absolute(l) if !(l >= 0.0 && l.is_finite()) => {
                return Err(usage(format!("lambda must be non-negative, got {l}")));
            }
            Regularization::RatioOfMax(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(usage(format!("lambda ratio must be positive, got {r}")));
            }
            Regularization::RatioOfMax(_) if model != ModelKind::Lasso => {
                return Err(usage("--lambda-ratio applies to the lasso model only"));
            }
            _ => {}
        }
        let eps = o.eps.unwrap_or(DEFAULT_EPS);
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(usage(format!("eps must be positive, got {eps}")));
        }
        let algorithm = o.algorithm.unwrap_or(Algorithm::ApproxRestart);
        if algorithm == Algorithm::Approx && o.iterations.is_none() {
            return Err(usage("--algorithm approx needs --iterations"));
        }
        if o.iterations == Some(0) {
            return Err(usage("--iterations must be positive"));
        }
        let tau = o.tau.unwrap_or(1);
        if tau == 0 {
            return Err(usage("tau must be at least 1"));
        }
        let runs = o.runs.unwrap_or(1);
        if runs == 0 {
            return Err(usage("--runs must be at least 1"));
        }
        if o.jobs == Some(0) {
            return Err(usage("--jobs must be at least 1"));
        }
        let center = o.center.unwrap_or(false);
        Ok(RunConfig {
            source,
            model,
            regularization,
            normalize: o.normalize.unwrap_or(false) || center,
            center,
            algorithm,
            tau,
            seed: o.seed.unwrap_or(0),
            schedule: ScheduleSpec::parse(o.schedule.as_deref().unwrap_or("variable"))?,
            truncate: o.truncate,
            mu: o.mu,
            policy: o.policy.unwrap_or(PolicyKind::Decrease),
            eps,
            budget: o.budget,
            iterations: o.iterations,
            trace_stride: o.trace_stride.filter(|&s| s > 0),
            runs,
            jobs: o.jobs,
            out: o.out,
        })
    }
}

/// Resolved options of one `path` invocation.
#[derive(Debug, Clone)]
pub struct PathConfig {
    pub run: RunConfig,
    pub points: usize,
    pub alpha: f64,
    pub double_every: u64,
    pub k0_epochs: u64,
    pub warmup_epochs: u64,
}

impl PathConfig {
    pub fn resolve(run: RunOptions, extra: PathOptions) -> Result<Self> {
        let algorithm = run.algorithm;
        if run.lambda.is_some() || run.lambda_ratio.is_some() {
            return Err(usage("path chooses lambda itself; drop --lambda/--lambda-ratio"));
        }
        if run.model.is_some_and(|m| m != ModelKind::Lasso) {
            return Err(usage("path supports the lasso model only"));
        }
        let run = RunConfig::resolve(run)?;
        if algorithm == Some(Algorithm::Approx) {
            return Err(usage("path runs approx-restart or cd"));
        }
        let points = extra.points.unwrap_or(10);
        if points == 0 {
            return Err(usage("--points must be at least 1"));
        }
        let ratio = extra.path_ratio.unwrap_or(1e-3);
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(usage(format!("--path-ratio must lie in (0, 1), got {ratio}")));
        }
        let double_every =
            extra.double_every.unwrap_or_else(|| (1.0 / run.eps).log2().ceil().max(1.0) as u64);
        if double_every == 0 {
            return Err(usage("--double-every must be at least 1"));
        }
        let k0_epochs = extra.k0_epochs.unwrap_or(10);
        if k0_epochs == 0 {
            return Err(usage("--k0-epochs must be at least 1"));
        }
        Ok(PathConfig {
            run,
            points,
            alpha: ratio.powf(1.0 / points as f64),
            double_every,
            k0_epochs,
            warmup_epochs: extra.warmup_epochs.unwrap_or(10),
        })
    }
}
