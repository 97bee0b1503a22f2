use super::{ordered_sum, CompositeProblem, Penalty};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::sparse::{DesignMatrix, ProductView};

/// `min_x 0.5 ||A x - b||^2 + lambda ||x||_1`.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    design: DesignMatrix,
    b: Vec<f64>,
    b_sum: f64,
    lambda: f64,
}

impl LassoProblem {
    pub fn new(design: DesignMatrix, b: Vec<f64>, lambda: f64) -> Result<Self> {
        if b.len() != design.n_rows() {
            return Err(Error::DimensionMismatch { expected: design.n_rows(), got: b.len() });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        super::check_finite(&b)?;
        let b_sum = b.iter().sum();
        Ok(LassoProblem { design, b, b_sum, lambda })
    }

    pub fn from_dataset(data: &Dataset, lambda: f64) -> Result<Self> {
        Self::new(data.design(), data.labels.clone(), lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.design.clone(), self.b.clone(), lambda)
    }

    pub fn response(&self) -> &[f64] {
        &self.b
    }

    /// `||A^T b||_inf`, the smallest `lambda` for which `x = 0` is optimal.
    pub fn lambda_max(&self) -> f64 {
        self.design.tmatvec(&self.b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl CompositeProblem for LassoProblem {
    fn dim(&self) -> usize {
        self.design.n_cols()
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

    fn smooth_from_product(&self, _x: &[f64], ax: &[f64]) -> f64 {
        0.5 * ordered_sum(ax.iter().zip(&self.b).map(|(a, b)| (a - b) * (a - b)))
    }

    #[inline]
    fn partial_grad(&self, i: usize, ax: &ProductView<'_>) -> f64 {
        let resid_sum = if self.design.is_shifted() { ax.sum() - self.b_sum } else { 0.0 };
        self.design.col_dot(i, |j| ax.at(j) - self.b[j], resid_sum)
    }

    fn coordinate_lipschitz(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.design.col_norm_sq(i)).collect()
    }

    /// Dual point `u = s (A x - b)` with `s = min(1, lambda / ||A^T (A x - b)||_inf)`
    /// and `D(u) = -0.5 ||u||^2 - <b, u>`.
    fn gap_from_product(&self, x: &[f64], ax: &[f64]) -> f64 {
        let resid: Vec<f64> = ax.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let corr = self.design.tmatvec(&resid).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = if corr <= self.lambda { 1.0 } else { self.lambda / corr };
        let primal = 0.5 * ordered_sum(resid.iter().map(|r| r * r)) + self.penalty().value(x);
        let dual = -0.5 * s * s * ordered_sum(resid.iter().map(|r| r * r))
            - s * ordered_sum(resid.iter().zip(&self.b).map(|(r, b)| r * b));
        (primal - dual).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ZeroColumnPolicy;
    use crate::sparse::CscMatrix;

    fn identity(n: usize) -> DesignMatrix {
        let mut d = vec![0.0; n * n];
        (0..n).for_each(|i| d[i * n + i] = 1.0);
        DesignMatrix::plain(CscMatrix::from_dense(n, n, &d))
    }

    #[test]
    fn objective_at_zero() {
        let p = LassoProblem::new(identity(3), vec![1.0, -2.0, 2.0], 0.1).unwrap();
        assert_eq!(p.objective(&[0.0; 3]).unwrap(), 4.5);
        assert!(p.objective(&[f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn partial_grad_at_zero_is_minus_atb() {
        let a = CscMatrix::from_dense(2, 2, &[1.0, 2.0, 3.0, -1.0]);
        let p = LassoProblem::new(DesignMatrix::plain(a), vec![1.0, 1.0], 0.0).unwrap();
        assert_eq!(p.partial_grad_at(0, &[0.0, 0.0]).unwrap(), -4.0);
        assert_eq!(p.partial_grad_at(1, &[0.0, 0.0]).unwrap(), -1.0);
        assert!(p.partial_grad_at(2, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn scalar_optimum_has_zero_gap() {
        let a = DesignMatrix::plain(CscMatrix::from_dense(1, 1, &[1.0]));
        let p = LassoProblem::new(a, vec![1.0], 0.5).unwrap();
        assert!(p.duality_gap(&[0.5]).unwrap().abs() < 1e-15);
        assert!(p.duality_gap(&[0.2]).unwrap() > 0.0);
    }

    #[test]
    fn zero_is_optimal_above_lambda_max() {
        let a = CscMatrix::from_dense(2, 2, &[1.0, 2.0, 3.0, -1.0]);
        let p = LassoProblem::new(DesignMatrix::plain(a), vec![1.0, 1.0], 0.0).unwrap();
        let lmax = p.lambda_max();
        assert_eq!(lmax, 4.0);
        let p = p.with_lambda(lmax).unwrap();
        assert_eq!(p.duality_gap(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn eso_identity_and_full_sampling() {
        let p = LassoProblem::new(identity(4), vec![0.0; 4], 1.0).unwrap();
        assert_eq!(p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap().v, vec![1.0; 4]);

        let a = CscMatrix::from_dense(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = LassoProblem::new(DesignMatrix::plain(a), vec![0.0; 2], 1.0).unwrap();
        let v1 = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap().v;
        let v3 = p.eso_vector(3, ZeroColumnPolicy::Reject).unwrap().v;
        assert_eq!(v1, vec![17.0, 29.0, 45.0]);
        for (a, b) in v1.iter().zip(&v3) {
            assert!((b - 3.0 * a).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_column_policy() {
        let a = CscMatrix::from_dense(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let p = LassoProblem::new(DesignMatrix::plain(a), vec![1.0, 1.0], 0.1).unwrap();
        assert!(p.eso_vector(1, ZeroColumnPolicy::Reject).is_err());
        let v = p.eso_vector(1, ZeroColumnPolicy::Drop).unwrap();
        assert_eq!(v.v, vec![2.0, 1.0]);
    }
}
