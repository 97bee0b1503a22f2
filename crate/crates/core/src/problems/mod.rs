//! Composite objectives `F = f + psi` with separable `psi`.
//!
//! Every model here has the form `f(x) = g(A x, x)` for a design matrix `A`,
//! so coordinate solvers can cache `A x` and evaluate partial derivatives in
//! time proportional to the nonzeros of one column.

mod lasso;
mod logreg;
mod quadratic;

pub use lasso::LassoProblem;
pub use logreg::LogRegProblem;
pub use quadratic::QuadraticProblem;

use crate::error::{Error, Result};
use crate::sparse::{DesignMatrix, ProductCache, ProductView};

/// Separable nonsmooth part `psi(x) = sum_i psi^i(x^i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Zero,
    L1(f64),
}

impl Penalty {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Penalty::Zero => 0.0,
            Penalty::L1(lambda) => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    pub fn weight(&self) -> f64 {
        match *self {
            Penalty::Zero => 0.0,
            Penalty::L1(lambda) => lambda,
        }
    }

    /// `argmin_z { grad * z + (weight / 2) (z - point)^2 + psi^i(z) }`.
    #[inline]
    pub fn prox_step(&self, grad: f64, weight: f64, point: f64) -> f64 {
        let u = point - grad / weight;
        match *self {
            Penalty::Zero => u,
            Penalty::L1(lambda) => soft_threshold(u, lambda / weight),
        }
    }
}

/// `sign(u) * max(|u| - t, 0)`.
#[inline]
pub fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

/// Curvature weights `v` satisfying the expected separable overapproximation
/// for a `tau`-nice sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct EsoVector {
    pub v: Vec<f64>,
    pub tau: usize,
}

impl EsoVector {
    /// `||h||_v^2 = sum_i v_i h_i^2`.
    pub fn norm_sq(&self, h: &[f64]) -> f64 {
        self.v.iter().zip(h).map(|(v, h)| v * h * h).sum()
    }

    pub fn dist_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        self.v.iter().zip(a.iter().zip(b)).map(|(v, (x, y))| v * (x - y) * (x - y)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroColumnPolicy {
    #[default]
    Reject,
    /// Coordinates with a zero column do not enter `f`; they get unit
    /// curvature so their prox step only sees `psi`.
    Drop,
}

/// Quadratic growth constant `mu(v, x0)` in the `||.||_v` geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorBound {
    Exact(f64),
    UserSupplied(f64),
    Unknown,
}

impl ErrorBound {
    pub fn mu_v(&self) -> Option<f64> {
        match *self {
            ErrorBound::Exact(mu) | ErrorBound::UserSupplied(mu) => Some(mu),
            ErrorBound::Unknown => None,
        }
    }

    pub fn user(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("error bound constant must be positive, got {mu}")));
        }
        Ok(ErrorBound::UserSupplied(mu))
    }
}

/// Range `[min_i mu / v_i, max_i mu / v_i]` containing `mu(v, x0)` given the
/// Euclidean constant `mu = mu(x0)`.
pub fn mu_v_range(mu: f64, v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &vi| (lo.min(mu / vi), hi.max(mu / vi)))
}

/// Sum in fixed left-to-right order; compensated (Neumaier) above 1e5 terms.
pub fn ordered_sum(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    if values.len() <= 100_000 {
        return values.fold(0.0, |acc, v| acc + v);
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Values of the objective pieces at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub psi: f64,
    pub objective: f64,
    pub gap: f64,
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

/// Contract shared by all models.
pub trait CompositeProblem: Send + Sync {
    fn dim(&self) -> usize;

    /// Matrix whose product with the iterate is cached by solvers.
    fn design(&self) -> &DesignMatrix;

    fn penalty(&self) -> Penalty;

    /// `f(x)` given `ax = A x`.
    fn smooth_from_product(&self, x: &[f64], ax: &[f64]) -> f64;

    /// `d f / d x^i` at the point whose product is `ax`.
    fn partial_grad(&self, i: usize, ax: &ProductView<'_>) -> f64;

    /// Coordinate-wise Lipschitz constants of the gradient.
    fn coordinate_lipschitz(&self) -> Vec<f64>;

    /// Weak-duality gap at `x` given `ax = A x`; an upper bound on
    /// `F(x) - F*`.
    fn gap_from_product(&self, x: &[f64], ax: &[f64]) -> f64;

    fn f_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let ax = self.design().matvec(x);
        Ok(self.smooth_from_product(x, &ax))
    }

    fn psi_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.penalty().value(x))
    }

    /// `F(x) = f(x) + psi(x)`.
    fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f_value(x)? + self.psi_value(x)?)
    }

    fn duality_gap(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let ax = self.design().matvec(x);
        Ok(self.gap_from_product(x, &ax))
    }

    /// Objective pieces and gap sharing one matrix-vector product.
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        self.check_point(x)?;
        let ax = self.design().matvec(x);
        let f = self.smooth_from_product(x, &ax);
        let psi = self.penalty().value(x);
        Ok(Evaluation { f, psi, objective: f + psi, gap: self.gap_from_product(x, &ax) })
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut p = ProductCache::zeros(self.design().n_rows());
        p.refresh(self.design(), x);
        let view = ProductView::Single(&p);
        Ok((0..self.dim()).map(|i| self.partial_grad(i, &view)).collect())
    }

    /// Partial derivative at an explicit point, with range checking.
    fn partial_grad_at(&self, i: usize, x: &[f64]) -> Result<f64> {
        if i >= self.dim() {
            return Err(Error::invalid(format!("coordinate {i} out of range 0..{}", self.dim())));
        }
        self.check_point(x)?;
        let p = self.design().product_of(x);
        Ok(self.partial_grad(i, &ProductView::Single(&p)))
    }

    /// `argmin_z { grad z + (weight / 2) (z - point)^2 + psi^i(z) }`.
    fn prox_coord(&self, i: usize, grad: f64, weight: f64, point: f64) -> Result<f64> {
        if i >= self.dim() {
            return Err(Error::invalid(format!("coordinate {i} out of range 0..{}", self.dim())));
        }
        if !(weight > 0.0) {
            return Err(Error::invalid(format!("prox weight must be positive, got {weight}")));
        }
        Ok(self.penalty().prox_step(grad, weight, point))
    }

    /// ESO weights for `tau`-nice sampling:
    /// `v_i = (1 + (tau - 1)(omega - 1) / max(n - 1, 1)) L_i` with `omega` the
    /// largest row sparsity of the design.
    fn eso_vector(&self, tau: usize, zeros: ZeroColumnPolicy) -> Result<EsoVector> {
        let n = self.dim();
        if tau == 0 || tau > n {
            return Err(Error::invalid(format!("tau must satisfy 1 <= tau <= n = {n}, got {tau}")));
        }
        let mut v = self.coordinate_lipschitz();
        let zero: Vec<usize> = (0..n).filter(|&i| !(v[i] > 0.0)).collect();
        if !zero.is_empty() {
            match zeros {
                ZeroColumnPolicy::Reject => return Err(Error::ZeroColumns(zero)),
                ZeroColumnPolicy::Drop => {
                    log::warn!("dropping zero columns {zero:?} from the smooth part");
                    zero.iter().for_each(|&i| v[i] = 1.0);
                }
            }
        }
        if tau > 1 {
            let omega = self.design().max_row_nnz().max(1) as f64;
            let beta = 1.0 + (tau as f64 - 1.0) * (omega - 1.0) / ((n as f64 - 1.0).max(1.0));
            v.iter_mut().for_each(|vi| *vi *= beta);
        }
        Ok(EsoVector { v, tau })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        check_finite(x)
    }
}
