//! `path`: Lasso regularization path with warm starts.
//!
//! The grid is `lambda_t = lambda_max alpha^t`, `t = 0..points`, with
//! `lambda_max = ||A^T b||_inf` (where `x = 0` is optimal). At the first
//! lambda whose warm start is not already `eps`-optimal, a few epochs of
//! plain coordinate descent run first. Each lambda is then solved by
//! restarted APPROX with the ruler schedule based at `K0`, where `K0`
//! doubles every `double_every` restarts and carries over to the next
//! lambda. With `--algorithm cd` each lambda is solved by coordinate descent
//! alone, checking the gap once per epoch.

use std::fs;

use anyhow::{Context, Result};
use restarted_approx::engine::{
    drive, CdSolver, Offsets, RunStatus, SamplingConfig, StopRule, RNG_NAME,
};
use restarted_approx::problems::{CompositeProblem, ZeroColumnPolicy};
use restarted_approx::restart::{restart_loop_from, RestartSchedule};
use restarted_approx::trace::{NullSink, TraceSink, Tracer};

use crate::model::lasso;
use crate::options::{Algorithm, PathConfig};
use crate::solve::{check_tau, csv_sink, epoch_stride, write_json};
use crate::summary::{PathPoint, PathSummary, SCHEMA_VERSION};

/// Default per-lambda budget, in epochs.
pub const DEFAULT_BUDGET_EPOCHS: u64 = 100_000;

pub fn cmd_path(cfg: &PathConfig) -> Result<PathSummary> {
    let run = &cfg.run;
    let base = lasso(run)?;
    let (n, m) = (base.dim(), base.design().n_rows());
    check_tau(run.tau, n)?;
    let eso = base.eso_vector(run.tau, ZeroColumnPolicy::Drop)?;
    let lambda_max = base.lambda_max();
    let epoch = epoch_stride(n, run.tau);
    let stride = run.trace_stride.unwrap_or(epoch);
    let budget = run.budget.unwrap_or(DEFAULT_BUDGET_EPOCHS * n as u64);
    let use_cd = run.algorithm == Algorithm::Cd;
    let mut sampler = SamplingConfig::new(n, run.tau, run.seed)?.sampler();

    let mut file_sink = match &run.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(csv_sink(dir, "trace.csv", "restarts.csv")?)
        }
        None => None,
    };
    let mut null = NullSink;
    let sink: &mut dyn TraceSink = match file_sink.as_mut() {
        Some(s) => s,
        None => &mut null,
    };

    let k0_initial = cfg.k0_epochs * epoch;
    let mut k0 = k0_initial;
    let mut warmed_up = false;
    let mut warmup_updates = 0u64;
    let mut x = vec![0.0; n];
    let mut points = Vec::with_capacity(cfg.points);
    for t in 0..cfg.points {
        let lambda = lambda_max * cfg.alpha.powi(t as i32);
        let p = base.with_lambda(lambda)?;
        let mut tracer = Tracer::new(&mut *sink, n).with_stride(Some(stride)).with_run_id(t as u64);
        let stop = StopRule { gap_tol: Some(run.eps), objective_cap: None, max_coord_updates: Some(budget) };
        let start = p.evaluate(&x)?;
        let mut status = if start.gap > run.eps { RunStatus::Completed } else { RunStatus::GapReached };
        let mut off = Offsets::default();
        let mut restarts = 0u64;
        if status == RunStatus::Completed {
            if use_cd || !warmed_up {
                let iterations = if use_cd { u64::MAX } else { cfg.warmup_epochs * epoch };
                warmed_up = true;
                let mut solver = CdSolver::new(&p, &eso, &x)?;
                let out = drive(&p, &mut solver, iterations, &mut sampler, &stop, off, &mut tracer)?;
                x = out.x;
                status = out.status;
                off.iterations += out.iterations as u64;
                off.coord_updates += out.coord_updates;
                if !use_cd {
                    warmup_updates = out.coord_updates;
                }
            }
            if !use_cd && status == RunStatus::Completed {
                let schedule = RestartSchedule::variable_doubling(k0, cfg.double_every)?;
                let policy = run.policy.policy();
                let out = restart_loop_from(&p, &eso, &x, &schedule, policy, &stop, &mut sampler, &mut tracer, off)?;
                x = out.x;
                status = out.status;
                off.iterations += out.iterations;
                off.coord_updates += out.coord_updates;
                restarts = out.restarts as u64;
                let doublings = (restarts / cfg.double_every).min(62) as u32;
                k0 = k0.checked_shl(doublings).filter(|&k| k >> doublings == k0).unwrap_or(u64::MAX);
            }
        }
        let end = p.evaluate(&x)?;
        tracer.record(off.iterations, off.coord_updates, end.objective, end.gap);
        if status == RunStatus::BudgetExhausted {
            log::warn!("lambda_{t} = {lambda:.4e}: budget exhausted at gap {:.3e}", end.gap);
        }
        points.push(PathPoint {
            t,
            lambda,
            status: status.into(),
            coord_updates: off.coord_updates,
            iterations: off.iterations,
            restarts,
            k0: (!use_cd).then_some(k0),
            final_objective: end.objective,
            duality_gap: end.gap,
            nnz: x.iter().filter(|&&v| v != 0.0).count(),
            elapsed_seconds: tracer.elapsed(),
        });
    }
    if let Some(s) = file_sink {
        s.finish().context("writing trace files")?;
    }
    let summary = PathSummary {
        schema_version: SCHEMA_VERSION,
        command: "path".into(),
        algorithm: if use_cd { "cd" } else { "approx-restart" }.into(),
        data: run.source.describe(),
        n,
        m,
        tau: run.tau,
        seed: run.seed,
        eps: run.eps,
        lambda_max,
        alpha: cfg.alpha,
        policy: (!use_cd).then(|| run.policy.name().to_string()),
        k0_initial: (!use_cd).then_some(k0_initial),
        double_every: (!use_cd).then_some(cfg.double_every),
        warmup_coord_updates: warmup_updates,
        budget_per_lambda: Some(budget),
        total_coord_updates: points.iter().map(|p| p.coord_updates).sum(),
        rng: RNG_NAME.into(),
        points,
        trace_file: run.out.as_ref().map(|_| "trace.csv".into()),
        restarts_file: run.out.as_ref().map(|_| "restarts.csv".into()),
    };
    if let Some(dir) = &run.out {
        write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}
