//! Restarted APPROX, restart schedules and restart-period calculators.

use std::f64::consts::E;

use crate::engine::{drive, ApproxSolver, Offsets, RunStatus, Sampler, StopRule};
use crate::error::{Error, Result};
use crate::problems::{CompositeProblem, ErrorBound, EsoVector};
use crate::trace::{Kept, RestartEvent, Tracer};

/// 2-adic valuation of `m >= 1`.
#[inline]
fn nu2(m: u64) -> u32 {
    m.trailing_zeros()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `K_r = K`.
    Fixed(u64),
    /// Ruler sequence `K_r = 2^{nu2(r + 1)} K0`.
    Variable(u64),
    /// `ceil(N / 2^i)` periods of `2^i` for `i = 1, 2, ...`.
    LogGrid(u64),
    /// Finite list; the loop ends when it is exhausted.
    Explicit(Vec<u64>),
    /// Ruler sequence whose base doubles every `double_every` restarts:
    /// `K_r = 2^{nu2(r + 1)} K0 2^{floor(r / double_every)}`.
    VariableDoubling { k0: u64, double_every: u64 },
}

/// A possibly infinite sequence of restart periods `K_0, K_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestartSchedule {
    kind: ScheduleKind,
    truncate: Option<u64>,
}

impl RestartSchedule {
    pub fn fixed(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("restart period must be >= 1"));
        }
        Ok(Self::from_kind(ScheduleKind::Fixed(k)))
    }

    pub fn variable(k0: u64) -> Result<Self> {
        if k0 == 0 {
            return Err(Error::invalid("K0 must be >= 1"));
        }
        Ok(Self::from_kind(ScheduleKind::Variable(k0)))
    }

    pub fn log_grid(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("log-grid parameter N must be >= 2, got {n}")));
        }
        Ok(Self::from_kind(ScheduleKind::LogGrid(n)))
    }

    pub fn explicit(periods: Vec<u64>) -> Result<Self> {
        if periods.is_empty() || periods.contains(&0) {
            return Err(Error::invalid("explicit schedule must be nonempty with periods >= 1"));
        }
        Ok(Self::from_kind(ScheduleKind::Explicit(periods)))
    }

    pub fn variable_doubling(k0: u64, double_every: u64) -> Result<Self> {
        if k0 == 0 || double_every == 0 {
            return Err(Error::invalid("K0 and the doubling interval must be >= 1"));
        }
        Ok(Self::from_kind(ScheduleKind::VariableDoubling { k0, double_every }))
    }

    /// Fixed schedule with the optimal period `K*`; needs a known error
    /// bound constant.
    pub fn fixed_optimal(mu: ErrorBound, theta0: f64) -> Result<Self> {
        let Some(mu) = mu.mu_v() else {
            return Err(Error::invalid(
                "the fixed K* schedule needs an error bound constant; use variable or log-grid",
            ));
        };
        Self::fixed(k_star(mu, theta0)?)
    }

    fn from_kind(kind: ScheduleKind) -> Self {
        RestartSchedule { kind, truncate: None }
    }

    /// Early truncation for the variable schedule: with `l ~ ln(delta0 / eps)`,
    /// the period `2^j K0` is skipped once it has been used `(j + 1) l` times.
    pub fn with_truncation(mut self, l: u64) -> Result<Self> {
        if !matches!(self.kind, ScheduleKind::Variable(_)) {
            return Err(Error::invalid("early truncation applies to the variable schedule only"));
        }
        if l == 0 {
            return Err(Error::invalid("truncation count must be >= 1"));
        }
        self.truncate = Some(l);
        Ok(self)
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// `K_r` without truncation; `None` past the end of an explicit list or
    /// once the period no longer fits in a `u64`.
    pub fn period(&self, r: u64) -> Option<u64> {
        let scaled = |k: u64, j: u32| k.checked_mul(1u64.checked_shl(j)?);
        match &self.kind {
            ScheduleKind::Fixed(k) => Some(*k),
            ScheduleKind::Variable(k0) => scaled(*k0, nu2(r + 1)),
            ScheduleKind::LogGrid(n) => {
                let mut left = r;
                let mut i = 1u32;
                loop {
                    let p = 1u64.checked_shl(i).filter(|&p| p != 0 && i < 64)?;
                    let copies = n.div_ceil(p);
                    if left < copies {
                        return Some(p);
                    }
                    left -= copies;
                    i += 1;
                }
            }
            ScheduleKind::Explicit(list) => list.get(r as usize).copied(),
            ScheduleKind::VariableDoubling { k0, double_every } => {
                let j = u32::try_from(r / double_every).ok()?;
                scaled(scaled(*k0, nu2(r + 1))?, j)
            }
        }
    }

    pub fn periods(&self) -> Periods<'_> {
        Periods { schedule: self, r: 0, used: Vec::new() }
    }

    /// Short textual form, `fixed:K`, `variable:K0`, `loggrid:N`, ...
    pub fn describe(&self) -> String {
        match &self.kind {
            ScheduleKind::Fixed(k) => format!("fixed:{k}"),
            ScheduleKind::Variable(k0) => format!("variable:{k0}"),
            ScheduleKind::LogGrid(n) => format!("loggrid:{n}"),
            ScheduleKind::Explicit(list) => {
                let s: Vec<String> = list.iter().map(|k| k.to_string()).collect();
                format!("explicit:{}", s.join(","))
            }
            ScheduleKind::VariableDoubling { k0, double_every } => {
                format!("variable-doubling:{k0}:{double_every}")
            }
        }
    }
}

/// Iterator over the (possibly truncated) periods of a schedule.
pub struct Periods<'a> {
    schedule: &'a RestartSchedule,
    r: u64,
    used: Vec<u64>,
}

impl Iterator for Periods<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            let r = self.r;
            let k = self.schedule.period(r)?;
            self.r += 1;
            let Some(l) = self.schedule.truncate else {
                return Some(k);
            };
            let j = nu2(r + 1) as usize;
            if self.used.len() <= j {
                self.used.resize(j + 1, 0);
            }
            if self.used[j] < (j as u64 + 1) * l {
                self.used[j] += 1;
                return Some(k);
            }
            if self.r > 1 << 62 {
                return None;
            }
        }
    }
}

pub fn schedule_variable(k0: u64) -> Result<RestartSchedule> {
    RestartSchedule::variable(k0)
}

pub fn schedule_log_grid(n: u64) -> Result<RestartSchedule> {
    RestartSchedule::log_grid(n)
}

/// Plain restarts (`guarantee_decrease = false`) or restarts that keep the
/// previous point when the candidate is worse (`true`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RestartPolicy {
    pub guarantee_decrease: bool,
}

impl RestartPolicy {
    pub const PLAIN: RestartPolicy = RestartPolicy { guarantee_decrease: false };
    pub const DECREASE: RestartPolicy = RestartPolicy { guarantee_decrease: true };
}

#[derive(Debug, Clone)]
pub struct RestartOutcome {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Duality gap at `x` if it was evaluated when the loop ended.
    pub gap: Option<f64>,
    pub status: RunStatus,
    /// Number of completed or interrupted APPROX runs.
    pub restarts: usize,
    pub iterations: u64,
    pub coord_updates: u64,
    /// Periods used, in order.
    pub periods: Vec<u64>,
}

/// Restarted APPROX. Each restart runs `K_r` iterations from the kept point.
/// With the decrease policy the candidate replaces the kept point only if
/// `F(candidate) <= F(kept)`.
///
/// With a gap tolerance the gap is checked at the start, at every restart
/// boundary and every `tracer.stride` iterations (default: one epoch) inside
/// runs. Under the decrease policy an in-run gap stop also requires
/// `F(x_k) <= F(kept)`.
#[allow(clippy::too_many_arguments)]
pub fn restart_loop<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
    schedule: &RestartSchedule,
    policy: RestartPolicy,
    stop: &StopRule,
    sampler: &mut Sampler,
    tracer: &mut Tracer<'_>,
) -> Result<RestartOutcome> {
    restart_loop_from(problem, eso, x0, schedule, policy, stop, sampler, tracer, Offsets::default())
}

/// [`restart_loop`] continuing cumulative counters from `offsets`.
#[allow(clippy::too_many_arguments)]
pub fn restart_loop_from<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
    schedule: &RestartSchedule,
    policy: RestartPolicy,
    stop: &StopRule,
    sampler: &mut Sampler,
    tracer: &mut Tracer<'_>,
    offsets: Offsets,
) -> Result<RestartOutcome> {
    let finite_schedule = matches!(schedule.kind(), ScheduleKind::Explicit(_));
    if stop.gap_tol.is_none() && stop.max_coord_updates.is_none() && !finite_schedule {
        return Err(Error::invalid("restart loop needs a gap tolerance or an update budget"));
    }
    if let Some(tol) = stop.gap_tol {
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("gap tolerance must be positive, got {tol}")));
        }
    }

    let mut kept = x0.to_vec();
    let start = problem.evaluate(&kept)?;
    let mut f_kept = start.objective;
    let mut gap_kept = Some(start.gap);
    let mut off = offsets;
    let mut out = RestartOutcome {
        x: Vec::new(),
        objective: f_kept,
        gap: gap_kept,
        status: RunStatus::Completed,
        restarts: 0,
        iterations: 0,
        coord_updates: 0,
        periods: Vec::new(),
    };
    if tracer.stride.is_some() {
        tracer.record(off.iterations, off.coord_updates, f_kept, start.gap);
    }
    let gap_done = |g: Option<f64>| matches!((stop.gap_tol, g), (Some(t), Some(g)) if g <= t);

    if gap_done(gap_kept) {
        out.status = RunStatus::GapReached;
    } else {
        for (r, k) in schedule.periods().enumerate() {
            if stop.max_coord_updates.is_some_and(|m| off.coord_updates >= m) {
                out.status = RunStatus::BudgetExhausted;
                break;
            }
            let mut solver = ApproxSolver::new(problem, eso, &kept)?;
            let run_stop = StopRule {
                gap_tol: stop.gap_tol,
                objective_cap: policy.guarantee_decrease.then_some(f_kept),
                max_coord_updates: stop.max_coord_updates,
            };
            let run = drive(problem, &mut solver, k, sampler, &run_stop, off, tracer)?;
            off.iterations += run.iterations as u64;
            off.coord_updates += run.coord_updates;
            out.restarts += 1;
            out.periods.push(k);

            let (f_cand, gap_cand) = match run.last_eval {
                Some(e) => (e.objective, Some(e.gap)),
                None => (problem.objective(&run.x)?, None),
            };
            let take = !policy.guarantee_decrease || f_cand <= f_kept;
            tracer.restart(RestartEvent {
                run_id: tracer.run_id,
                restart_index: r,
                period: k,
                f_before: f_kept,
                f_after: f_cand,
                kept: if take { Kept::Candidate } else { Kept::Previous },
            });
            if take {
                kept = run.x;
                f_kept = f_cand;
                gap_kept = gap_cand;
            }
            match run.status {
                RunStatus::GapReached => {
                    out.status = RunStatus::GapReached;
                    break;
                }
                RunStatus::BudgetExhausted => {
                    out.status = RunStatus::BudgetExhausted;
                    break;
                }
                RunStatus::Completed => {}
            }
            if stop.gap_tol.is_some() {
                if gap_kept.is_none() {
                    gap_kept = Some(problem.duality_gap(&kept)?);
                }
                if gap_done(gap_kept) {
                    out.status = RunStatus::GapReached;
                    break;
                }
            }
        }
    }
    if tracer.stride.is_some() {
        let gap = match gap_kept {
            Some(g) => g,
            None => problem.duality_gap(&kept)?,
        };
        gap_kept = Some(gap);
        tracer.record(off.iterations, off.coord_updates, f_kept, gap);
    }
    out.x = kept;
    out.objective = f_kept;
    out.gap = gap_kept;
    out.iterations = off.iterations - offsets.iterations;
    out.coord_updates = off.coord_updates - offsets.coord_updates;
    Ok(out)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_theta0(theta0: f64) -> Result<()> {
    if theta0 > 0.0 && theta0 <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("theta0 must lie in (0, 1], got {theta0}")))
    }
}

/// Restart period guaranteeing contraction by `alpha` in expectation:
/// `ceil((2 / theta0) (sqrt((1 + mu) / (alpha mu)) - 1) + 1)`.
pub fn k_alpha(mu: f64, theta0: f64, alpha: f64) -> Result<u64> {
    check_positive("mu", mu)?;
    check_theta0(theta0)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let k = (2.0 / theta0) * (((1.0 + mu) / (alpha * mu)).sqrt() - 1.0) + 1.0;
    Ok(k.ceil() as u64)
}

/// Optimal fixed restart period `ceil((2 e / theta0) (sqrt((1 + mu) / mu) - 1) + 1)`.
pub fn k_star(mu: f64, theta0: f64) -> Result<u64> {
    check_positive("mu", mu)?;
    check_theta0(theta0)?;
    let k = (2.0 * E / theta0) * (((1.0 + mu) / mu).sqrt() - 1.0) + 1.0;
    Ok(k.ceil() as u64)
}

/// Iteration bound `ln(delta0 / eps) K*` of the fixed `K*` schedule.
pub fn n_star(mu: f64, theta0: f64, delta0: f64, eps: f64) -> Result<f64> {
    check_positive("delta0", delta0)?;
    check_positive("eps", eps)?;
    if eps >= delta0 {
        return Err(Error::invalid("eps must be smaller than delta0"));
    }
    Ok((delta0 / eps).ln() * k_star(mu, theta0)? as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableComplexity {
    /// Number of doubling levels `J`.
    pub j: i64,
    /// Bound on the total number of APPROX iterations.
    pub bound: f64,
}

/// Complexity of the variable schedule given `K*`:
/// `J = ceil(max(log2(K*/K0), 0)) + ceil(log2(ln(delta0/eps) / 2))` and
/// `bound = (ceil(max(log2(K*/K0), 0)) + ceil(log2 ln(delta0/eps)) + 1) ln(delta0/eps) max(K*, K0)`.
pub fn variable_complexity(k0: u64, k_star: u64, delta0: f64, eps: f64) -> Result<VariableComplexity> {
    if k0 == 0 || k_star == 0 {
        return Err(Error::invalid("K0 and K* must be >= 1"));
    }
    check_positive("delta0", delta0)?;
    check_positive("eps", eps)?;
    let l = (delta0 / eps).ln();
    if !(l > 1.0) {
        return Err(Error::invalid(format!(
            "ln(delta0 / eps) = {l} must exceed 1 for the logarithms in the bound"
        )));
    }
    let head = (k_star as f64 / k0 as f64).log2().max(0.0).ceil();
    let j = head + (l / 2.0).log2().ceil();
    let bound = (head + l.log2().ceil() + 1.0) * l * k_star.max(k0) as f64;
    Ok(VariableComplexity { j: j as i64, bound })
}

/// `ceil((1/e) sqrt(C_F + C_d / mu) - a)` for a method whose output satisfies
/// `E[F(x_K) - F*] <= (C_F (F(x0) - F*) + C_d dist(x0)^2 / 2) / (K + a)^2`.
/// The raw ceiling is returned and may be nonpositive.
pub fn k_star_general(c_f: f64, c_d: f64, mu: f64, a: f64) -> Result<i64> {
    check_positive("C_F", c_f)?;
    check_positive("mu", mu)?;
    if !(c_d >= 0.0 && c_d.is_finite()) {
        return Err(Error::invalid(format!("C_d must be >= 0, got {c_d}")));
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("a must be >= 0, got {a}")));
    }
    Ok(((c_f + c_d / mu).sqrt() / E - a).ceil() as i64)
}
