//! Momentum coefficients of APPROX.
//!
//! The sequence starts at `theta0 = tau / n` and follows
//! `theta_{k+1} = (sqrt(theta_k^4 + 4 theta_k^2) - theta_k^2) / 2`, i.e. the
//! positive root of `X^2 + theta_k^2 X - theta_k^2`. It satisfies
//! `(1 - theta_{k+1}) / theta_{k+1}^2 = 1 / theta_k^2` and the sandwich
//! `(2 - theta0) / (k + (2 - theta0) / theta0) <= theta_k <= 2 / (k + 2 / theta0)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ThetaSequence {
    cache: Vec<f64>,
}

/// One step of the recurrence, in the rationalized form
/// `2 theta / (theta + sqrt(theta^2 + 4))` which has no cancellation for small
/// `theta`.
#[inline]
pub fn next_theta(theta: f64) -> f64 {
    2.0 * theta / (theta + (theta * theta + 4.0).sqrt())
}

impl ThetaSequence {
    /// `theta0 = tau / n`.
    pub fn init(tau: usize, n: usize) -> Result<Self> {
        if tau == 0 || n == 0 || tau > n {
            return Err(Error::invalid(format!(
                "sampling size must satisfy 1 <= tau <= n (tau = {tau}, n = {n})"
            )));
        }
        Self::from_theta0(tau as f64 / n as f64)
    }

    pub fn from_theta0(theta0: f64) -> Result<Self> {
        if !(theta0 > 0.0 && theta0 <= 1.0) {
            return Err(Error::invalid(format!("theta0 must lie in (0, 1], got {theta0}")));
        }
        Ok(ThetaSequence { cache: vec![theta0] })
    }

    pub fn theta0(&self) -> f64 {
        self.cache[0]
    }

    /// `theta_k`, extending the cache as needed.
    pub fn at(&mut self, k: usize) -> f64 {
        self.extend_to(k);
        self.cache[k]
    }

    /// Cached value, if already computed.
    pub fn get(&self, k: usize) -> Option<f64> {
        self.cache.get(k).copied()
    }

    pub fn extend_to(&mut self, k: usize) {
        if k < self.cache.len() {
            return;
        }
        self.cache.reserve(k + 1 - self.cache.len());
        let mut last = *self.cache.last().unwrap();
        while self.cache.len() <= k {
            last = next_theta(last);
            self.cache.push(last);
        }
    }

    /// Number of cached values (`theta_0 .. theta_{len-1}`).
    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cache
    }

    /// `theta_{-1}^2 := theta0^2 / (1 - theta0)`; undefined for full sampling.
    pub fn theta_minus1_sq(&self) -> Result<f64> {
        let t0 = self.theta0();
        if t0 >= 1.0 {
            return Err(Error::invalid(
                "theta_{-1}^2 is undefined for theta0 = 1 (full sampling)",
            ));
        }
        Ok(t0 * t0 / (1.0 - t0))
    }
}

/// Analytic sandwich bounds on `theta_k`.
pub fn theta_bounds(theta0: f64, k: usize) -> (f64, f64) {
    let k = k as f64;
    let lower = (2.0 - theta0) / (k + (2.0 - theta0) / theta0);
    let upper = 2.0 / (k + 2.0 / theta0);
    (lower, upper)
}
