//! APPROX (accelerated parallel proximal coordinate descent) and the plain
//! randomized proximal coordinate descent baseline.
//!
//! APPROX is run in the change of variables
//!
//! ```text
//! x_k = theta_{k-1}^2 u_k + z_k,    y_k = theta_k^2 u_k + z_k,
//! ```
//!
//! with `u_0 = 0`, `z_0 = x_0`. A coordinate step `z^i += dz` is followed by
//! `u^i -= (1 - n theta_k / tau) / theta_k^2 * dz`, so one iteration touches
//! only the sampled coordinates and their columns. The products `A u` and
//! `A z` are cached and recomputed from scratch every `refresh_every`
//! iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problems::{CompositeProblem, EsoVector, Evaluation};
use crate::sparse::{ProductCache, ProductView};
use crate::theta::ThetaSequence;
use crate::trace::{NullSink, TraceSink, Tracer};

/// Name of the random generator driving the samplings; reported in run
/// metadata.
pub const RNG_NAME: &str = "ChaCha8Rng";

/// `tau`-nice sampling: a uniformly random subset of exactly `tau` distinct
/// coordinates out of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingConfig {
    pub n: usize,
    pub tau: usize,
    pub seed: u64,
}

impl SamplingConfig {
    pub fn new(n: usize, tau: usize, seed: u64) -> Result<Self> {
        if n == 0 || tau == 0 || tau > n {
            return Err(Error::invalid(format!(
                "sampling size must satisfy 1 <= tau <= n (tau = {tau}, n = {n})"
            )));
        }
        Ok(SamplingConfig { n, tau, seed })
    }

    pub fn serial(n: usize, seed: u64) -> Result<Self> {
        Self::new(n, 1, seed)
    }

    /// Iterations per pass over the coordinates, `ceil(n / tau)`.
    pub fn iterations_per_epoch(&self) -> u64 {
        self.n.div_ceil(self.tau) as u64
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(*self)
    }
}

/// Draws a `tau`-nice subset.
pub fn sample_subset<R: Rng + ?Sized>(cfg: &SamplingConfig, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(cfg.tau);
    fill_subset(cfg, rng, &mut out);
    out
}

fn fill_subset<R: Rng + ?Sized>(cfg: &SamplingConfig, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    if cfg.tau == 1 {
        out.push(rng.random_range(0..cfg.n));
    } else if cfg.tau == cfg.n {
        out.extend(0..cfg.n);
    } else {
        out.extend(rand::seq::index::sample(rng, cfg.n, cfg.tau));
    }
}

/// Seeded stream of `tau`-nice subsets.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: SamplingConfig,
    rng: ChaCha8Rng,
    buf: Vec<usize>,
}

impl Sampler {
    pub fn new(cfg: SamplingConfig) -> Self {
        Sampler { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), buf: Vec::with_capacity(cfg.tau) }
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.cfg
    }

    pub fn next_subset(&mut self) -> &[usize] {
        fill_subset(&self.cfg, &mut self.rng, &mut self.buf);
        &self.buf
    }
}

/// Common interface of the coordinate solvers, used by the run driver.
pub trait CoordinateSolver {
    fn step(&mut self, sampler: &mut Sampler) -> Result<()>;

    /// The current iterate `x_k`.
    fn current_x(&self) -> Vec<f64>;

    /// Iterations performed since construction.
    fn iteration(&self) -> usize;

    fn coord_updates(&self) -> u64;
}

fn validate_start<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
) -> Result<()> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if eso.v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: eso.v.len() });
    }
    if eso.v.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("ESO weights must be positive and finite"));
    }
    crate::problems::check_finite(x0)
}

/// Solver state of APPROX.
pub struct ApproxSolver<'p, P: CompositeProblem + ?Sized> {
    problem: &'p P,
    v: &'p [f64],
    tau: usize,
    theta: ThetaSequence,
    u: Vec<f64>,
    z: Vec<f64>,
    au: ProductCache,
    az: ProductCache,
    k: usize,
    coord_updates: u64,
    refresh_every: usize,
    since_refresh: usize,
    entries_touched: u64,
    grads: Vec<f64>,
}

impl<'p, P: CompositeProblem + ?Sized> ApproxSolver<'p, P> {
    pub fn new(problem: &'p P, eso: &'p EsoVector, x0: &[f64]) -> Result<Self> {
        validate_start(problem, eso, x0)?;
        let n = problem.dim();
        let design = problem.design();
        let m = design.n_rows();
        Ok(ApproxSolver {
            problem,
            v: &eso.v,
            tau: eso.tau,
            theta: ThetaSequence::init(eso.tau, n)?,
            u: vec![0.0; n],
            z: x0.to_vec(),
            au: ProductCache::zeros(m),
            az: design.product_of(x0),
            k: 0,
            coord_updates: 0,
            refresh_every: 10 * n,
            since_refresh: 0,
            entries_touched: design.stored().nnz() as u64,
            grads: Vec::with_capacity(eso.tau),
        })
    }

    /// Iterations between full recomputations of the cached products
    /// (default `10 n`).
    pub fn with_refresh_every(mut self, iterations: usize) -> Self {
        self.refresh_every = iterations.max(1);
        self
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `y_k = theta_k^2 u_k + z_k`.
    pub fn y(&mut self) -> Vec<f64> {
        let c = self.theta.at(self.k).powi(2);
        self.u.iter().zip(&self.z).map(|(u, z)| c * u + z).collect()
    }

    /// `A x_k` assembled from the cached products.
    pub fn cached_x_product(&self) -> Vec<f64> {
        if self.k == 0 {
            return self.az.to_vec();
        }
        let c = self.x_coef();
        ProductView::Combined { coef: c, u: &self.au, z: &self.az }.to_vec()
    }

    /// Matrix entries read or written so far (gradient reads, cache updates
    /// and refreshes).
    pub fn entries_touched(&self) -> u64 {
        self.entries_touched
    }

    pub fn theta(&self) -> &ThetaSequence {
        &self.theta
    }

    fn x_coef(&self) -> f64 {
        let t = self.theta.get(self.k - 1).expect("theta cached up to k");
        t * t
    }

    fn refresh(&mut self) {
        let design = self.problem.design();
        self.au.refresh(design, &self.u);
        self.az.refresh(design, &self.z);
        self.entries_touched += 2 * design.stored().nnz() as u64;
        self.since_refresh = 0;
    }
}

impl<P: CompositeProblem + ?Sized> CoordinateSolver for ApproxSolver<'_, P> {
    fn step(&mut self, sampler: &mut Sampler) -> Result<()> {
        if sampler.config().tau != self.tau || sampler.config().n != self.u.len() {
            return Err(Error::invalid("sampling does not match the ESO vector"));
        }
        let n = self.u.len() as f64;
        let th = self.theta.at(self.k);
        self.theta.extend_to(self.k + 1);
        let coef = th * th;
        let u_factor = -(1.0 - n * th / self.tau as f64) / coef;
        let design = self.problem.design();
        let penalty = self.problem.penalty();
        let subset = sampler.next_subset();

        self.grads.clear();
        {
            let view = ProductView::Combined { coef, u: &self.au, z: &self.az };
            for &i in subset {
                self.grads.push(self.problem.partial_grad(i, &view));
                self.entries_touched += design.col_nnz(i) as u64;
            }
        }
        for (&i, &g) in subset.iter().zip(&self.grads) {
            let weight = th * n * self.v[i] / self.tau as f64;
            let z_new = penalty.prox_step(g, weight, self.z[i]);
            if !z_new.is_finite() {
                return Err(Error::NonFinite { iteration: self.k, coordinate: i });
            }
            let dz = z_new - self.z[i];
            if dz != 0.0 {
                let du = u_factor * dz;
                self.z[i] = z_new;
                self.u[i] += du;
                self.az.add_column(design, i, dz);
                self.au.add_column(design, i, du);
                self.entries_touched += 2 * design.col_nnz(i) as u64;
            }
        }
        self.coord_updates += subset.len() as u64;
        self.k += 1;
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_every {
            self.refresh();
        }
        Ok(())
    }

    fn current_x(&self) -> Vec<f64> {
        if self.k == 0 {
            return self.z.clone();
        }
        let c = self.x_coef();
        self.u.iter().zip(&self.z).map(|(u, z)| c * u + z).collect()
    }

    fn iteration(&self) -> usize {
        self.k
    }

    fn coord_updates(&self) -> u64 {
        self.coord_updates
    }
}

/// Randomized proximal coordinate descent: each sampled coordinate takes the
/// step `x^i <- prox_{psi^i / v_i}(x^i - grad_i f(x) / v_i)`, applied one
/// coordinate at a time so the objective never increases.
pub struct CdSolver<'p, P: CompositeProblem + ?Sized> {
    problem: &'p P,
    v: &'p [f64],
    tau: usize,
    x: Vec<f64>,
    ax: ProductCache,
    k: usize,
    coord_updates: u64,
    refresh_every: usize,
    since_refresh: usize,
}

impl<'p, P: CompositeProblem + ?Sized> CdSolver<'p, P> {
    pub fn new(problem: &'p P, eso: &'p EsoVector, x0: &[f64]) -> Result<Self> {
        validate_start(problem, eso, x0)?;
        let n = problem.dim();
        Ok(CdSolver {
            problem,
            v: &eso.v,
            tau: eso.tau,
            x: x0.to_vec(),
            ax: problem.design().product_of(x0),
            k: 0,
            coord_updates: 0,
            refresh_every: 10 * n,
            since_refresh: 0,
        })
    }
}

impl<P: CompositeProblem + ?Sized> CoordinateSolver for CdSolver<'_, P> {
    fn step(&mut self, sampler: &mut Sampler) -> Result<()> {
        if sampler.config().tau != self.tau || sampler.config().n != self.x.len() {
            return Err(Error::invalid("sampling does not match the ESO vector"));
        }
        let design = self.problem.design();
        let penalty = self.problem.penalty();
        let subset = sampler.next_subset();
        for &i in subset {
            let g = self.problem.partial_grad(i, &ProductView::Single(&self.ax));
            let x_new = penalty.prox_step(g, self.v[i], self.x[i]);
            if !x_new.is_finite() {
                return Err(Error::NonFinite { iteration: self.k, coordinate: i });
            }
            let dx = x_new - self.x[i];
            if dx != 0.0 {
                self.x[i] = x_new;
                self.ax.add_column(design, i, dx);
            }
        }
        self.coord_updates += subset.len() as u64;
        self.k += 1;
        self.since_refresh += 1;
        if self.since_refresh >= self.refresh_every {
            self.ax.refresh(design, &self.x);
            self.since_refresh = 0;
        }
        Ok(())
    }

    fn current_x(&self) -> Vec<f64> {
        self.x.clone()
    }

    fn iteration(&self) -> usize {
        self.k
    }

    fn coord_updates(&self) -> u64 {
        self.coord_updates
    }
}

/// Early-termination rules checked during a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StopRule {
    /// Stop once the duality gap is at most this value.
    pub gap_tol: Option<f64>,
    /// A gap stop only counts if `F(x_k)` is at most this value.
    pub objective_cap: Option<f64>,
    /// Upper limit on cumulative coordinate updates (including `offset`).
    pub max_coord_updates: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    GapReached,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub coord_updates: u64,
    pub status: RunStatus,
    /// Evaluation at `x` when the run ended on a check.
    pub last_eval: Option<Evaluation>,
}

/// Cumulative counters of the enclosing run, so traces stay monotone across
/// restarts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Offsets {
    pub iterations: u64,
    pub coord_updates: u64,
}

/// Runs `solver` for at most `iterations` steps, tracing and checking the
/// stop rule every `tracer.stride` iterations (every epoch when only a gap
/// tolerance is set).
pub fn drive<P, S>(
    problem: &P,
    solver: &mut S,
    iterations: u64,
    sampler: &mut Sampler,
    stop: &StopRule,
    offsets: Offsets,
    tracer: &mut Tracer<'_>,
) -> Result<RunOutcome>
where
    P: CompositeProblem + ?Sized,
    S: CoordinateSolver,
{
    let check_every = tracer.stride.or(stop.gap_tol.map(|_| sampler.config().iterations_per_epoch()));
    let mut status = RunStatus::Completed;
    let mut last_eval = None;
    let mut local = 0u64;
    loop {
        let global_k = offsets.iterations + local;
        let updates = offsets.coord_updates + solver.coord_updates();
        let due = check_every.is_some_and(|s| global_k.is_multiple_of(s)) && (local > 0 || global_k == 0);
        if due {
            let x = solver.current_x();
            let eval = problem.evaluate(&x)?;
            if tracer.is_due(global_k) {
                tracer.record(global_k, updates, eval.objective, eval.gap);
            }
            last_eval = Some(eval);
            if let Some(tol) = stop.gap_tol {
                if eval.gap <= tol && stop.objective_cap.is_none_or(|c| eval.objective <= c) {
                    status = RunStatus::GapReached;
                    break;
                }
            }
        }
        if local >= iterations {
            break;
        }
        if stop.max_coord_updates.is_some_and(|max| updates >= max) {
            status = RunStatus::BudgetExhausted;
            break;
        }
        solver.step(sampler)?;
        last_eval = None;
        local += 1;
    }
    Ok(RunOutcome {
        x: solver.current_x(),
        iterations: solver.iteration(),
        coord_updates: solver.coord_updates(),
        status,
        last_eval,
    })
}

fn run_standalone<P, S>(
    problem: &P,
    mut solver: S,
    iterations: u64,
    sampling: &SamplingConfig,
    sink: &mut dyn TraceSink,
    stride: Option<u64>,
) -> Result<RunOutcome>
where
    P: CompositeProblem + ?Sized,
    S: CoordinateSolver,
{
    let mut sampler = sampling.sampler();
    let mut tracer = Tracer::new(sink, problem.dim()).with_stride(stride);
    let out = drive(
        problem,
        &mut solver,
        iterations,
        &mut sampler,
        &StopRule::default(),
        Offsets::default(),
        &mut tracer,
    )?;
    if stride.is_some() {
        let e = problem.evaluate(&out.x)?;
        tracer.record(out.iterations as u64, out.coord_updates, e.objective, e.gap);
    }
    Ok(out)
}

/// `K` iterations of APPROX from `x0`. Emits a trace record every `stride`
/// iterations and at the end when `stride` is set.
pub fn approx_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
    iterations: u64,
    sampling: &SamplingConfig,
    sink: &mut dyn TraceSink,
    stride: Option<u64>,
) -> Result<RunOutcome> {
    if iterations == 0 {
        return Err(Error::invalid("APPROX needs K >= 1 iterations"));
    }
    let solver = ApproxSolver::new(problem, eso, x0)?;
    run_standalone(problem, solver, iterations, sampling, sink, stride)
}

/// `K` iterations of randomized proximal coordinate descent from `x0`.
pub fn cd_run<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
    iterations: u64,
    sampling: &SamplingConfig,
    sink: &mut dyn TraceSink,
    stride: Option<u64>,
) -> Result<RunOutcome> {
    let solver = CdSolver::new(problem, eso, x0)?;
    run_standalone(problem, solver, iterations, sampling, sink, stride)
}

/// Convenience: `K` APPROX iterations without tracing.
pub fn approx_final<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    x0: &[f64],
    iterations: u64,
    sampling: &SamplingConfig,
) -> Result<Vec<f64>> {
    Ok(approx_run(problem, eso, x0, iterations, sampling, &mut NullSink, None)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{QuadraticProblem, ZeroColumnPolicy};

    #[test]
    fn full_sampling_returns_all() {
        let cfg = SamplingConfig::new(5, 5, 1).unwrap();
        let mut s = cfg.sampler();
        assert_eq!(s.next_subset(), &[0, 1, 2, 3, 4]);
        assert!(SamplingConfig::new(5, 6, 1).is_err());
        assert!(SamplingConfig::new(5, 0, 1).is_err());
    }

    #[test]
    fn subsets_are_distinct() {
        let cfg = SamplingConfig::new(20, 7, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let mut s = sample_subset(&cfg, &mut rng);
            assert_eq!(s.len(), 7);
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 7);
        }
    }

    #[test]
    fn one_step_scalar_quadratic() {
        // n = 1, tau = 1: x1 = y0 - f'(y0) / v with y0 = x0.
        let p = QuadraticProblem::diagonal(&[3.0], vec![1.0], 0.0).unwrap();
        let eso = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap();
        let cfg = SamplingConfig::serial(1, 0).unwrap();
        let x1 = approx_final(&p, &eso, &[4.0], 1, &cfg).unwrap();
        let want = 4.0 - 3.0 * (4.0 - 1.0) / 3.0;
        assert!((x1[0] - want).abs() < 1e-15);
    }

    #[test]
    fn stationary_start_is_fixed() {
        let p = QuadraticProblem::diagonal(&[1.0, 2.0, 3.0], vec![0.5, -1.0, 2.0], 0.0).unwrap();
        let eso = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap();
        let cfg = SamplingConfig::serial(3, 4).unwrap();
        let x0 = p.center().to_vec();
        let x = approx_final(&p, &eso, &x0, 50, &cfg).unwrap();
        assert_eq!(x, x0);
        let x = cd_run(&p, &eso, &x0, 50, &cfg, &mut NullSink, None).unwrap().x;
        assert_eq!(x, x0);
    }

    #[test]
    fn rejects_zero_iterations_and_mismatched_tau() {
        let p = QuadraticProblem::diagonal(&[1.0, 2.0], vec![0.0; 2], 0.0).unwrap();
        let eso = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap();
        let cfg = SamplingConfig::serial(2, 0).unwrap();
        assert!(approx_final(&p, &eso, &[1.0, 1.0], 0, &cfg).is_err());
        let cfg2 = SamplingConfig::new(2, 2, 0).unwrap();
        assert!(approx_final(&p, &eso, &[1.0, 1.0], 3, &cfg2).is_err());
    }
}
