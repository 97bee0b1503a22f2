use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CompositeProblem, ErrorBound, EsoVector, Penalty};
use crate::error::{Error, Result};
use crate::sparse::{CscMatrix, DesignMatrix, ProductView};

/// Synthetic `f(x) = 0.5 (x - c)^T Q (x - c)` with `Q` positive definite and
/// `psi = 0` or `lambda ||.||_1`. With `psi = 0` the unique minimizer is `c`
/// and `F* = 0`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    q: DMatrix<f64>,
    design: DesignMatrix,
    center: Vec<f64>,
    q_center: Vec<f64>,
    lambda: f64,
}

impl QuadraticProblem {
    /// `q` is row-major `n x n`.
    pub fn new(n: usize, q: &[f64], center: Vec<f64>, lambda: f64) -> Result<Self> {
        if q.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: q.len() });
        }
        if center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: center.len() });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        super::check_finite(q)?;
        super::check_finite(&center)?;
        let qm = DMatrix::from_row_slice(n, n, q);
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (qm[(i, j)], qm[(j, i)]);
                if (a - b).abs() > 1e-12 * (a.abs() + b.abs()).max(1.0) {
                    return Err(Error::invalid("Q must be symmetric"));
                }
            }
        }
        if qm.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let design = DesignMatrix::plain(CscMatrix::from_dense(n, n, q));
        let q_center = design.matvec(&center);
        Ok(QuadraticProblem { q: qm, design, center, q_center, lambda })
    }

    pub fn diagonal(q: &[f64], center: Vec<f64>, lambda: f64) -> Result<Self> {
        let n = q.len();
        let mut dense = vec![0.0; n * n];
        q.iter().enumerate().for_each(|(i, &qi)| dense[i * n + i] = qi);
        Self::new(n, &dense, center, lambda)
    }

    /// Random dense instance with unit diagonal whose smallest eigenvalue is
    /// exactly `mu` (so that, with `v = diag(Q) = 1`, `mu_v = mu`). The
    /// center has standard Gaussian entries.
    pub fn random_unit_diagonal(n: usize, mu: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("need n >= 2"));
        }
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::invalid(format!("mu must lie in (0, 1), got {mu}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        // Well-spread spectrum, then normalized to unit diagonal.
        let qr = g.qr();
        let u = qr.q();
        let spectrum: Vec<f64> = (0..n).map(|k| 10f64.powf(-2.0 * k as f64 / (n - 1) as f64)).collect();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spectrum));
        let m = &u * lam * u.transpose();
        let d: Vec<f64> = (0..n).map(|i| 1.0 / m[(i, i)].sqrt()).collect();
        let c = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * d[i] * d[j]);
        let c = (&c + c.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(c.clone()).eigenvalues.min();
        // Shift and rescale: s (C - m I) + mu I keeps unit diagonal when
        // s = (1 - mu) / (1 - m).
        let s = (1.0 - mu) / (1.0 - min_eig);
        let mut q = DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            s * (c[(i, j)] - min_eig * id) + mu * id
        });
        for i in 0..n {
            q[(i, i)] = 1.0;
        }
        let center: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let rows: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| q[(i, j)]).collect();
        Self::new(n, &rows, center, 0.0)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Minimizer and optimal value when `psi = 0`.
    pub fn known_optimum(&self) -> Option<(&[f64], f64)> {
        (self.lambda == 0.0).then_some((self.center.as_slice(), 0.0))
    }

    /// Largest `mu` with `F(x) >= F* + (mu / 2) ||x - x*||_v^2`, i.e.
    /// `lambda_min(diag(v)^{-1/2} Q diag(v)^{-1/2})`.
    pub fn exact_mu_v(&self, v: &EsoVector) -> Result<ErrorBound> {
        if self.lambda != 0.0 {
            return Err(Error::invalid("exact error bound requires psi = 0"));
        }
        let n = self.dim();
        if v.v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.v.len() });
        }
        let d: Vec<f64> = v.v.iter().map(|vi| 1.0 / vi.sqrt()).collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| self.q[(i, j)] * d[i] * d[j]);
        let mu = SymmetricEigen::new(scaled).eigenvalues.min();
        if !(mu > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(ErrorBound::Exact(mu))
    }

    pub fn q_entry(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }
}

impl CompositeProblem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn design(&self) -> &DesignMatrix {
        &self.design
    }

    fn penalty(&self) -> Penalty {
        if self.lambda > 0.0 {
            Penalty::L1(self.lambda)
        } else {
            Penalty::Zero
        }
    }

    fn smooth_from_product(&self, x: &[f64], ax: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..x.len() {
            acc += (x[i] - self.center[i]) * (ax[i] - self.q_center[i]);
        }
        0.5 * acc
    }

    #[inline]
    fn partial_grad(&self, i: usize, ax: &ProductView<'_>) -> f64 {
        ax.at(i) - self.q_center[i]
    }

    fn coordinate_lipschitz(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.q[(i, i)]).collect()
    }

    /// Fenchel dual at `w = s grad f(x)` with `s = min(1, lambda / ||grad f||_inf)`:
    /// `f*(w) = w^T c + 0.5 w^T Q^{-1} w = s g^T c + s^2 f(x)`.
    fn gap_from_product(&self, x: &[f64], ax: &[f64]) -> f64 {
        let f = self.smooth_from_product(x, ax);
        if self.lambda == 0.0 {
            return f.max(0.0);
        }
        let g: Vec<f64> = ax.iter().zip(&self.q_center).map(|(a, q)| a - q).collect();
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = if gmax <= self.lambda { 1.0 } else { self.lambda / gmax };
        let gc: f64 = g.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        (f + self.penalty().value(x) + s * gc + s * s * f).max(0.0)
    }
}
