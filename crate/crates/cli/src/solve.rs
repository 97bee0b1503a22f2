//! `solve`: one or more independent runs of a single algorithm.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use restarted_approx::engine::{
    drive, ApproxSolver, CdSolver, Offsets, SamplingConfig, StopRule, RNG_NAME,
};
use restarted_approx::problems::{CompositeProblem, EsoVector, ZeroColumnPolicy};
use restarted_approx::restart::{restart_loop, RestartSchedule};
use restarted_approx::trace::{CsvSink, NullSink, TraceSink, Tracer};

use crate::model::{build, Built};
use crate::options::{usage, Algorithm, RunConfig};
use crate::summary::{RunSummary, SolveSummary, Status, SCHEMA_VERSION};

pub(crate) fn check_tau(tau: usize, n: usize) -> Result<()> {
    if tau == 0 || tau > n {
        return Err(usage(format!("tau must satisfy 1 <= tau <= n = {n}, got {tau}")));
    }
    Ok(())
}

pub(crate) fn epoch_stride(n: usize, tau: usize) -> u64 {
    n.div_ceil(tau) as u64
}

pub(crate) type FileSink = CsvSink<BufWriter<File>, BufWriter<File>>;

pub(crate) fn csv_sink(dir: &Path, trace: &str, restarts: &str) -> Result<FileSink> {
    let open = |name: &str| -> Result<BufWriter<File>> {
        let path = dir.join(name);
        Ok(BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        ))
    };
    Ok(CsvSink::new(open(trace)?, open(restarts)?)?)
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

struct Job<'a> {
    problem: &'a dyn CompositeProblem,
    eso: &'a EsoVector,
    cfg: &'a RunConfig,
    schedule: Option<&'a RestartSchedule>,
}

impl Job<'_> {
    fn run(&self, run_id: u64, seed: u64, sink: &mut dyn TraceSink) -> Result<RunSummary> {
        let (p, cfg) = (self.problem, self.cfg);
        let n = p.dim();
        let sampling = SamplingConfig::new(n, cfg.tau, seed)?;
        let mut sampler = sampling.sampler();
        let stride = cfg.trace_stride.unwrap_or_else(|| epoch_stride(n, cfg.tau));
        let mut tracer = Tracer::new(sink, n).with_stride(Some(stride)).with_run_id(run_id);
        let stop = StopRule { gap_tol: Some(cfg.eps), objective_cap: None, max_coord_updates: cfg.budget };
        let x0 = vec![0.0; n];

        let (x, status, iterations, coord_updates, restarts) = match cfg.algorithm {
            Algorithm::ApproxRestart => {
                let schedule = self.schedule.expect("schedule built for approx-restart");
                let out = restart_loop(p, self.eso, &x0, schedule, cfg.policy.policy(), &stop, &mut sampler, &mut tracer)?;
                (out.x, out.status, out.iterations, out.coord_updates, out.restarts as u64)
            }
            Algorithm::Approx | Algorithm::Cd => {
                let out = if cfg.algorithm == Algorithm::Cd {
                    let mut solver = CdSolver::new(p, self.eso, &x0)?;
                    drive(p, &mut solver, u64::MAX, &mut sampler, &stop, Offsets::default(), &mut tracer)?
                } else {
                    let mut solver = ApproxSolver::new(p, self.eso, &x0)?;
                    let k = cfg.iterations.expect("checked at resolution");
                    drive(p, &mut solver, k, &mut sampler, &stop, Offsets::default(), &mut tracer)?
                };
                let restarts = u64::from(cfg.algorithm == Algorithm::Approx);
                (out.x, out.status, out.iterations as u64, out.coord_updates, restarts)
            }
        };
        let eval = p.evaluate(&x)?;
        tracer.record(iterations, coord_updates, eval.objective, eval.gap);
        Ok(RunSummary {
            run_id,
            seed,
            status: status.into(),
            final_objective: eval.objective,
            duality_gap: eval.gap,
            coord_updates,
            iterations,
            epochs: coord_updates as f64 / n as f64,
            restarts,
            elapsed_seconds: tracer.elapsed(),
            trace_file: None,
            restarts_file: None,
        })
    }

    fn run_to(&self, run_id: u64, seed: u64, dir: Option<&Path>, single: bool) -> Result<RunSummary> {
        let Some(dir) = dir else {
            return self.run(run_id, seed, &mut NullSink);
        };
        let (trace, restarts) = if single {
            ("trace.csv".to_string(), "restarts.csv".to_string())
        } else {
            (format!("trace_run{run_id}.csv"), format!("restarts_run{run_id}.csv"))
        };
        let mut sink = csv_sink(dir, &trace, &restarts)?;
        let mut summary = self.run(run_id, seed, &mut sink)?;
        sink.finish().context("writing trace files")?;
        summary.trace_file = Some(trace);
        summary.restarts_file = Some(restarts);
        Ok(summary)
    }
}

/// Runs the configured algorithm `cfg.runs` times with consecutive seeds and
/// writes `summary.json` plus trace files when an output directory is set.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveSummary> {
    let Built { problem, n, m, lambda } = build(cfg)?;
    check_tau(cfg.tau, n)?;
    let eso = problem.eso_vector(cfg.tau, ZeroColumnPolicy::Drop)?;
    let theta0 = cfg.tau as f64 / n as f64;
    let schedule = match cfg.algorithm {
        Algorithm::ApproxRestart => Some(cfg.schedule.build(theta0, cfg.mu, cfg.truncate)?),
        _ => None,
    };
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let job = Job { problem: problem.as_ref(), eso: &eso, cfg, schedule: schedule.as_ref() };
    let dir = cfg.out.as_deref();
    let single = cfg.runs == 1;
    let runs: Vec<RunSummary> = if single {
        vec![job.run_to(0, cfg.seed, dir, true)?]
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.unwrap_or(0)).build()?;
        pool.install(|| {
            (0..cfg.runs as u64)
                .into_par_iter()
                .map(|i| job.run_to(i, cfg.seed + i, dir, false))
                .collect::<Result<Vec<_>>>()
        })?
    };
    for r in &runs {
        if r.status == Status::BudgetExhausted {
            log::warn!("run {} stopped on the budget with gap {:.3e}", r.run_id, r.duality_gap);
        }
    }
    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        command: "solve".into(),
        model: cfg.model.name().into(),
        algorithm: cfg.algorithm.name().into(),
        data: cfg.source.describe(),
        n,
        m,
        lambda,
        tau: cfg.tau,
        schedule: schedule.as_ref().map(|s| s.describe()),
        policy: (cfg.algorithm == Algorithm::ApproxRestart).then(|| cfg.policy.name().to_string()),
        eps: cfg.eps,
        budget: cfg.budget,
        rng: RNG_NAME.into(),
        runs,
    };
    if let Some(dir) = dir {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

