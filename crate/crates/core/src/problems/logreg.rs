use super::{ordered_sum, CompositeProblem, Penalty};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::sparse::{DesignMatrix, ProductView};

/// L1-regularized logistic loss with the sign convention
/// `f(x) = c sum_j log(1 + exp(b_j a_j^T x))`, `c = lambda1 / ||A^T b||_inf`,
/// and `psi(x) = ||x||_1`.
#[derive(Debug, Clone)]
pub struct LogRegProblem {
    design: DesignMatrix,
    b: Vec<f64>,
    lambda1: f64,
    scale: f64,
}

/// `log(1 + exp(t))` without overflow.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

impl LogRegProblem {
    /// Labels must be in `{-1, +1}` (see [`Dataset::with_binary_labels`]).
    /// Implicitly centered designs are not supported: the loss gradient is not
    /// linear in the residual, so the rank-one correction would cost O(m) per
    /// coordinate.
    pub fn new(design: DesignMatrix, b: Vec<f64>, lambda1: f64) -> Result<Self> {
        if b.len() != design.n_rows() {
            return Err(Error::DimensionMismatch { expected: design.n_rows(), got: b.len() });
        }
        if design.is_shifted() {
            return Err(Error::invalid("logistic model does not support centered designs"));
        }
        if b.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::invalid("logistic labels must be in {-1, +1}"));
        }
        if !(lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(Error::invalid(format!("lambda1 must be positive, got {lambda1}")));
        }
        let atb = design.tmatvec(&b).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if atb == 0.0 {
            return Err(Error::invalid("||A^T b||_inf is zero; loss scale undefined"));
        }
        Ok(LogRegProblem { design, b, lambda1, scale: lambda1 / atb })
    }

    pub fn from_dataset(data: &Dataset, lambda1: f64) -> Result<Self> {
        let data = data.with_binary_labels()?;
        Self::new(data.design(), data.labels, lambda1)
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// `lambda1 / ||A^T b||_inf`.
    pub fn loss_scale(&self) -> f64 {
        self.scale
    }

    pub fn labels(&self) -> &[f64] {
        &self.b
    }
}

impl CompositeProblem for LogRegProblem {
    fn dim(&self) -> usize {
        self.design.n_cols()
    }

    fn design(&self) -> &DesignMatrix {
        &self.design
    }

    fn penalty(&self) -> Penalty {
        Penalty::L1(1.0)
    }

    fn smooth_from_product(&self, _x: &[f64], ax: &[f64]) -> f64 {
        self.scale * ordered_sum(ax.iter().zip(&self.b).map(|(t, b)| softplus(b * t)))
    }

    #[inline]
    fn partial_grad(&self, i: usize, ax: &ProductView<'_>) -> f64 {
        let b = &self.b;
        self.scale * self.design.col_dot(i, |j| b[j] * sigmoid(b[j] * ax.at(j)), 0.0)
    }

    /// `v_i = (c / 4) sum_j (b_j A_ji)^2`.
    fn coordinate_lipschitz(&self) -> Vec<f64> {
        let a = self.design.stored();
        (0..self.dim())
            .map(|i| {
                let (rows, vals) = a.col(i);
                0.25 * self.scale
                    * rows.iter().zip(vals).map(|(&r, &v)| (self.b[r] * v).powi(2)).sum::<f64>()
            })
            .collect()
    }

    /// Dual candidate `u_j = s c b_j sigmoid(b_j t_j)` with `s` chosen so that
    /// `||A^T u||_inf <= 1`; the conjugate of the scaled softplus is
    /// `c (p ln p + (1 - p) ln(1 - p))` at `p = u_j / (c b_j)`.
    fn gap_from_product(&self, x: &[f64], ax: &[f64]) -> f64 {
        let p: Vec<f64> = ax.iter().zip(&self.b).map(|(t, b)| sigmoid(b * t)).collect();
        let u: Vec<f64> = p.iter().zip(&self.b).map(|(p, b)| self.scale * b * p).collect();
        let corr = self.design.tmatvec(&u).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s = if corr <= 1.0 { 1.0 } else { 1.0 / corr };
        let primal = self.smooth_from_product(x, ax) + self.penalty().value(x);
        let conj = self.scale
            * ordered_sum(p.iter().map(|&p| {
                let q = s * p;
                xlogx(q) + xlogx(1.0 - q)
            }));
        (primal + conj).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ZeroColumnPolicy;
    use crate::sparse::CscMatrix;

    fn toy() -> LogRegProblem {
        let a = CscMatrix::from_dense(3, 2, &[1.0, 0.5, -2.0, 0.0, 0.5, 1.5]);
        LogRegProblem::new(DesignMatrix::plain(a), vec![1.0, -1.0, 1.0], 2.0).unwrap()
    }

    #[test]
    fn value_at_zero_is_m_log2() {
        let p = toy();
        // A^T b = (1 + 2 + 0.5, 0.5 + 1.5) = (3.5, 2.0)
        let c = 2.0 / 3.5;
        assert!((p.loss_scale() - c).abs() < 1e-15);
        let want = c * 3.0 * 2f64.ln();
        assert!((p.objective(&[0.0, 0.0]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn partial_grad_at_zero_is_half_atb() {
        let p = toy();
        let c = p.loss_scale();
        assert!((p.partial_grad_at(0, &[0.0, 0.0]).unwrap() - 0.5 * c * 3.5).abs() < 1e-15);
        assert!((p.partial_grad_at(1, &[0.0, 0.0]).unwrap() - 0.5 * c * 2.0).abs() < 1e-15);
    }

    #[test]
    fn eso_for_pm_one_labels() {
        let p = toy();
        let v = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap().v;
        let c = p.loss_scale();
        assert!((v[0] - 0.25 * c * 5.25).abs() < 1e-15);
        assert!((v[1] - 0.25 * c * 2.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_labels_and_centering() {
        let a = CscMatrix::from_dense(2, 1, &[1.0, 1.0]);
        assert!(LogRegProblem::new(DesignMatrix::plain(a.clone()), vec![1.0, 0.0], 1.0).is_err());
        let shifted = DesignMatrix::new(a, Some(vec![0.5])).unwrap();
        assert!(LogRegProblem::new(shifted, vec![1.0, -1.0], 1.0).is_err());
    }

    #[test]
    fn gap_is_nonnegative() {
        let p = toy();
        for x in [[0.0, 0.0], [0.3, -0.2], [-1.0, 2.0]] {
            let g = p.duality_gap(&x).unwrap();
            assert!(g >= 0.0 && g.is_finite());
        }
    }

    #[test]
    fn stable_helpers() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
