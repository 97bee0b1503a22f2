//! Worst-case contraction factors of restarted APPROX under strong convexity.
//!
//! For `K` APPROX iterations the potential
//! `Delta(x) = ((1 - theta0) / theta0^2) (F(x) - F*) + dist_v(x, X*)^2 / (2 theta0^2)`
//! satisfies `E[Delta(x_K)] <= rho_K Delta(x_0)` with
//!
//! ```text
//! rho_K = (theta_{K-1}^2 / theta_{-1}^2)
//!         * (prod_{l=1}^K (1 - s_l) + sum_{l=0}^{K-1} (theta_{-1}^2 / theta_l) prod_{j=l+1}^K (1 - s_j))
//! ```
//!
//! where `s_l = sigma^K_l`. Only `sigma^K_K` depends on `K`, which makes a
//! sweep over `K = 1..K_max` linear in `K_max`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::problems::{CompositeProblem, EsoVector};
use crate::theta::ThetaSequence;

/// Above this `K` the products are accumulated in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuery {
    pub theta0: f64,
    pub mu: f64,
    pub k: u64,
}

impl RateQuery {
    /// Accepts `theta0 in (0, 1]`; the exact factor additionally needs
    /// `theta0 < 1`.
    pub fn new(theta0: f64, mu: f64, k: u64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 <= 1.0) {
            return Err(Error::invalid(format!("theta0 must lie in (0, 1], got {theta0}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be positive and finite, got {mu}")));
        }
        if k == 0 {
            return Err(Error::invalid("K must be >= 1"));
        }
        Ok(RateQuery { theta0, mu, k })
    }

    /// `theta0 = tau / n`.
    pub fn from_sampling(n: usize, tau: usize, mu: f64, k: u64) -> Result<Self> {
        let theta0 = ThetaSequence::init(tau, n)?.theta0();
        Self::new(theta0, mu, k)
    }

    fn require_exact(&self) -> Result<()> {
        if self.theta0 >= 1.0 {
            return Err(Error::invalid("exact rate needs theta0 < 1 (theta_{-1} undefined)"));
        }
        Ok(())
    }
}

fn thetas(q: &RateQuery) -> ThetaSequence {
    let mut t = ThetaSequence::from_theta0(q.theta0).expect("validated theta0");
    t.extend_to(q.k as usize);
    t
}

/// `sigma^K_k` for `k < K`; independent of `K`.
#[inline]
fn sigma_inner(theta0: f64, mu: f64, t_prev: f64, t: f64) -> f64 {
    (1.0 - (t / t_prev) * (1.0 - theta0) / (1.0 - t)) / (1.0 + t_prev / (theta0 * mu))
}

/// `sigma^K_K`.
#[inline]
fn sigma_last(theta0: f64, mu: f64, t_prev: f64) -> f64 {
    (1.0 - (t_prev / theta0) * (1.0 - theta0)) / (1.0 + t_prev / (theta0 * mu))
}

/// `sigma^K_1, ..., sigma^K_K`.
pub fn sigma_sequence(q: &RateQuery) -> Result<Vec<f64>> {
    q.require_exact()?;
    let t = thetas(q);
    let t = t.as_slice();
    let k = q.k as usize;
    let mut out: Vec<f64> = (1..k).map(|l| sigma_inner(q.theta0, q.mu, t[l - 1], t[l])).collect();
    out.push(sigma_last(q.theta0, q.mu, t[k - 1]));
    Ok(out)
}

/// Exact contraction factor `rho_K`.
pub fn rho_exact(q: &RateQuery) -> Result<f64> {
    q.require_exact()?;
    if q.k > LOG_SPACE_THRESHOLD {
        return Ok(ln_rho_exact(q)?.exp());
    }
    let sigma = sigma_sequence(q)?;
    let t = thetas(q);
    let t = t.as_slice();
    let k = q.k as usize;
    let tm1_sq = q.theta0 * q.theta0 / (1.0 - q.theta0);
    // Suffix products prod_{j=l+1}^K (1 - sigma_j), accumulated from the end.
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for l in (0..k).rev() {
        suffix *= 1.0 - sigma[l];
        sum += tm1_sq / t[l] * suffix;
    }
    let full = suffix;
    Ok(t[k - 1] * t[k - 1] / tm1_sq * (full + sum))
}

/// `ln rho_K`, computed in log space throughout.
pub fn ln_rho_exact(q: &RateQuery) -> Result<f64> {
    q.require_exact()?;
    Ok(*ln_rho_sweep(q.theta0, q.mu, q.k)?.last().unwrap())
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln rho_K` for `K = 1..=k_max` in one pass.
///
/// With `P_k = prod_{l=1}^k (1 - sigma_l)` and
/// `S_K = sum_{l=0}^{K-1} theta_{-1}^2 / (theta_l P_l)`,
/// `rho_K = (theta_{K-1}^2 / theta_{-1}^2) (1 - sigma^K_K) P_{K-1} (1 + S_K)`.
pub fn ln_rho_sweep(theta0: f64, mu: f64, k_max: u64) -> Result<Vec<f64>> {
    let q = RateQuery::new(theta0, mu, k_max)?;
    q.require_exact()?;
    let t = thetas(&q);
    let t = t.as_slice();
    let ln_tm1_sq = 2.0 * theta0.ln() - (-theta0).ln_1p();
    let mut ln_p = 0.0; // ln P_{K-1}
    let mut ln_s = f64::NEG_INFINITY; // ln S_K
    let mut out = Vec::with_capacity(k_max as usize);
    for kk in 1..=k_max as usize {
        let l = kk - 1;
        if l > 0 {
            ln_p += (-sigma_inner(theta0, mu, t[l - 1], t[l])).ln_1p();
        }
        ln_s = log_add_exp(ln_s, ln_tm1_sq - t[l].ln() - ln_p);
        let s_last = sigma_last(theta0, mu, t[kk - 1]);
        let ln_rho = 2.0 * t[kk - 1].ln() - ln_tm1_sq + (-s_last).ln_1p() + ln_p + log_add_exp(0.0, ln_s);
        out.push(ln_rho);
    }
    Ok(out)
}

/// `rho_K` for `K = 1..=k_max`.
pub fn rho_exact_sweep(theta0: f64, mu: f64, k_max: u64) -> Result<Vec<f64>> {
    Ok(ln_rho_sweep(theta0, mu, k_max)?.into_iter().map(f64::exp).collect())
}

/// Simplified bound `(1 + (1 - theta0) mu) / (1 + theta0^2 mu / (2 theta_{K-1}^2))`.
pub fn rho_bound(q: &RateQuery) -> f64 {
    let mut t = ThetaSequence::from_theta0(q.theta0).expect("validated theta0");
    let tk = t.at(q.k as usize - 1);
    rho_bound_at(q.theta0, q.mu, tk)
}

/// [`rho_bound`] for `K = 1..=k_max`.
pub fn rho_bound_sweep(theta0: f64, mu: f64, k_max: u64) -> Result<Vec<f64>> {
    let q = RateQuery::new(theta0, mu, k_max)?;
    let t = thetas(&q);
    Ok(t.as_slice()[..k_max as usize].iter().map(|&tk| rho_bound_at(theta0, mu, tk)).collect())
}

#[inline]
fn rho_bound_at(theta0: f64, mu: f64, theta_prev: f64) -> f64 {
    (1.0 + (1.0 - theta0) * mu) / (1.0 + theta0 * theta0 * mu / (2.0 * theta_prev * theta_prev))
}

/// `ln` of [`rho_bound`], accurate when the factor is close to 1.
fn ln_rho_bound_at(theta0: f64, mu: f64, theta_prev: f64) -> f64 {
    ((1.0 - theta0) * mu).ln_1p() - (theta0 * theta0 * mu / (2.0 * theta_prev * theta_prev)).ln_1p()
}

/// Per-iteration contraction of the coordinate descent baseline.
pub trait CdRateModel {
    fn rate(&self, theta0: f64, mu: f64) -> f64;

    /// `1 - rate`, override for precision when the rate is close to 1.
    fn one_minus_rate(&self, theta0: f64, mu: f64) -> f64 {
        1.0 - self.rate(theta0, mu)
    }
}

/// `1 - theta0 mu / (1 + mu)`: randomized proximal coordinate descent with
/// `mu` the strong convexity constant in the `||.||_v` norm.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardCdRate;

impl CdRateModel for StandardCdRate {
    fn rate(&self, theta0: f64, mu: f64) -> f64 {
        1.0 - self.one_minus_rate(theta0, mu)
    }

    fn one_minus_rate(&self, theta0: f64, mu: f64) -> f64 {
        theta0 * mu / (1.0 + mu)
    }
}

impl<F: Fn(f64, f64) -> f64> CdRateModel for F {
    fn rate(&self, theta0: f64, mu: f64) -> f64 {
        self(theta0, mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerIterRates {
    /// `rho_bound^{1/K}`.
    pub approx_bound: f64,
    /// `rho_K^{1/K}`, when `theta0 < 1`.
    pub approx_exact: Option<f64>,
    pub cd: f64,
    /// `1 - approx_bound`, computed without cancellation.
    pub one_minus_approx_bound: f64,
    pub one_minus_approx_exact: Option<f64>,
    pub one_minus_cd: f64,
}

fn from_ln(ln_rho: f64, k: u64) -> (f64, f64) {
    let r = ln_rho / k as f64;
    (r.exp(), -r.exp_m1())
}

/// Per-iteration rates of restarted APPROX with period `K` and of the
/// coordinate descent baseline.
pub fn per_iter_rates(q: &RateQuery, cd: &dyn CdRateModel) -> Result<PerIterRates> {
    let mut t = ThetaSequence::from_theta0(q.theta0)?;
    let tk = t.at(q.k as usize - 1);
    let (approx_bound, one_minus_approx_bound) = from_ln(ln_rho_bound_at(q.theta0, q.mu, tk), q.k);
    let exact = if q.theta0 < 1.0 {
        let ln = if q.k > LOG_SPACE_THRESHOLD { ln_rho_exact(q)? } else { rho_exact(q)?.ln() };
        Some(from_ln(ln, q.k))
    } else {
        None
    };
    let one_minus_cd = cd.one_minus_rate(q.theta0, q.mu);
    Ok(PerIterRates {
        approx_bound,
        approx_exact: exact.map(|e| e.0),
        cd: 1.0 - one_minus_cd,
        one_minus_approx_bound,
        one_minus_approx_exact: exact.map(|e| e.1),
        one_minus_cd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure1Row {
    pub k: u64,
    pub one_minus_rate_restart_bound: f64,
    pub one_minus_rate_restart_exact: f64,
    pub one_minus_rate_cd: f64,
}

impl Figure1Row {
    pub const CSV_HEADER: &'static str =
        "K,one_minus_rate_restart_bound,one_minus_rate_restart_exact,one_minus_rate_cd";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e}",
            self.k,
            self.one_minus_rate_restart_bound,
            self.one_minus_rate_restart_exact,
            self.one_minus_rate_cd
        )
    }
}

/// `1 - rate` of restarted APPROX (bound and exact) and of coordinate
/// descent for each `K` in the grid, with `theta0 = tau / n`.
pub fn figure1_table(
    mu: f64,
    n: usize,
    tau: usize,
    k_grid: &[u64],
    cd: &dyn CdRateModel,
) -> Result<Vec<Figure1Row>> {
    let theta0 = ThetaSequence::init(tau, n)?.theta0();
    if theta0 >= 1.0 {
        return Err(Error::invalid("rate table needs tau < n"));
    }
    let k_max = k_grid.iter().copied().max().unwrap_or(0);
    if k_max == 0 || k_grid.contains(&0) {
        return Err(Error::invalid("K grid must be nonempty with K >= 1"));
    }
    RateQuery::new(theta0, mu, k_max)?;
    let ln_rho = ln_rho_sweep(theta0, mu, k_max)?;
    let mut t = ThetaSequence::from_theta0(theta0)?;
    t.extend_to(k_max as usize);
    let one_minus_cd = cd.one_minus_rate(theta0, mu);
    Ok(k_grid
        .iter()
        .map(|&k| {
            let tk = t.as_slice()[k as usize - 1];
            Figure1Row {
                k,
                one_minus_rate_restart_bound: from_ln(ln_rho_bound_at(theta0, mu, tk), k).1,
                one_minus_rate_restart_exact: from_ln(ln_rho[k as usize - 1], k).1,
                one_minus_rate_cd: one_minus_cd,
            }
        })
        .collect())
}

pub fn write_figure1_csv<W: Write>(rows: &[Figure1Row], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", Figure1Row::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// Roughly `per_decade` log-spaced integers in `[k_min, k_max]`, deduplicated.
pub fn log_spaced_grid(k_min: u64, k_max: u64, per_decade: usize) -> Vec<u64> {
    assert!(k_min >= 1 && k_max >= k_min && per_decade >= 1);
    let (lo, hi) = ((k_min as f64).log10(), (k_max as f64).log10());
    let steps = ((hi - lo) * per_decade as f64).ceil() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / steps.max(1) as f64;
            (10f64.powf(e).round() as u64).clamp(k_min, k_max)
        })
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Bound,
    Exact,
}

/// Longest contiguous run of grid points on which restarted APPROX has a
/// larger `1 - rate` than coordinate descent, as `(K_first, K_last)`.
pub fn advantage_window(rows: &[Figure1Row], kind: RateKind) -> Option<(u64, u64)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, r) in rows.iter().enumerate() {
        let a = match kind {
            RateKind::Bound => r.one_minus_rate_restart_bound,
            RateKind::Exact => r.one_minus_rate_restart_exact,
        };
        if a > r.one_minus_rate_cd {
            let s = *start.get_or_insert(i);
            if best.is_none_or(|(bs, be)| i - s > be - bs) {
                best = Some((s, i));
            }
        } else {
            start = None;
        }
    }
    best.map(|(s, e)| (rows[s].k, rows[e].k))
}

/// `Delta(x) = ((1 - theta0) / theta0^2) (F(x) - F*) + ||x - x*||_v^2 / (2 theta0^2)`.
pub fn lyapunov_delta<P: CompositeProblem + ?Sized>(
    problem: &P,
    eso: &EsoVector,
    theta0: f64,
    x: &[f64],
    x_star: &[f64],
    f_star: f64,
) -> Result<f64> {
    let f = problem.objective(x)?;
    let t2 = theta0 * theta0;
    Ok((1.0 - theta0) / t2 * (f - f_star) + eso.dist_sq(x, x_star) / (2.0 * t2))
}

/// Checks that the auxiliary sequence `d_k` of the rate proof exists:
/// `sigma^K_k <= 1 - (1 - theta0) (1/theta_{k-1} - 1/theta0) / (1/theta_k - 1/theta0)`
/// for `k = 1..K-1`. Returns the first violating `k`, if any.
pub fn d_sequence_violation(q: &RateQuery) -> Result<Option<u64>> {
    let sigma = sigma_sequence(q)?;
    let t = thetas(q);
    let t = t.as_slice();
    let inv0 = 1.0 / q.theta0;
    for k in 1..q.k as usize {
        let den = 1.0 / t[k] - inv0;
        let upper = if den > 0.0 { 1.0 - (1.0 - q.theta0) * (1.0 / t[k - 1] - inv0) / den } else { 1.0 };
        if sigma[k - 1] > upper + 1e-15 {
            return Ok(Some(k as u64));
        }
    }
    Ok(None)
}

/// Recurrence linking consecutive exact factors:
/// `rho_{K+1} = (1 - theta_K) (1 + theta0 mu (1 - theta0) / theta_K) / (1 + theta0 mu / theta_K) rho_K
///            + (1 + (1 - theta0) mu) / (1 + theta0 mu / theta_K) theta_K`.
pub fn rho_next(theta0: f64, mu: f64, theta_k: f64, rho_k: f64) -> f64 {
    let den = 1.0 + theta0 * mu / theta_k;
    (1.0 - theta_k) * (1.0 + theta0 * mu * (1.0 - theta0) / theta_k) / den * rho_k
        + (1.0 + (1.0 - theta0) * mu) / den * theta_k
}
