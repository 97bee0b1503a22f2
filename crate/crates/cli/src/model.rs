//! Problem construction from a resolved configuration.

use anyhow::{Context, Result};
use restarted_approx::data::{parse_libsvm, synth_lasso_correlated, synth_logistic, Dataset};
use restarted_approx::problems::{CompositeProblem, LassoProblem, LogRegProblem, QuadraticProblem};

use crate::options::{usage, ModelKind, Regularization, RunConfig, Source};

/// A model instance together with its size.
pub struct Built {
    pub problem: Box<dyn CompositeProblem>,
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let raw = match &cfg.source {
        Source::File(path) => {
            parse_libsvm(path).with_context(|| format!("loading {}", path.display()))?
        }
        Source::Synthetic { n, m, density, noise, correlation, seed, .. } => match cfg.model {
            ModelKind::Logreg if *correlation != 0.0 => {
                return Err(usage("--gen-correlation applies to lasso data only"));
            }
            ModelKind::Logreg => synth_logistic(*n, *m, *density, *noise, *seed)?.dataset,
            _ => synth_lasso_correlated(*n, *m, *density, *noise, *correlation, *seed)?.dataset,
        },
    };
    let ds = if cfg.normalize { raw.normalize_columns(cfg.center)? } else { raw };
    if cfg.model == ModelKind::Logreg {
        Ok(ds.with_binary_labels()?)
    } else {
        Ok(ds)
    }
}

pub fn lasso(cfg: &RunConfig) -> Result<LassoProblem> {
    let ds = load_dataset(cfg)?;
    Ok(LassoProblem::from_dataset(&ds, 0.0)?)
}

pub fn build(cfg: &RunConfig) -> Result<Built> {
    if cfg.model == ModelKind::Quadratic {
        let Source::Synthetic { n, mu, seed, .. } = cfg.source else {
            return Err(usage("the quadratic model is synthetic only"));
        };
        let Regularization::Absolute(lambda) = cfg.regularization else {
            return Err(usage("the quadratic model takes --lambda"));
        };
        let base = QuadraticProblem::random_unit_diagonal(n, mu, seed)?;
        let problem = if lambda > 0.0 {
            let q: Vec<f64> = (0..n * n).map(|k| base.q_entry(k / n, k % n)).collect();
            QuadraticProblem::new(n, &q, base.center().to_vec(), lambda)?
        } else {
            base
        };
        return Ok(Built { problem: Box::new(problem), n, m: n, lambda });
    }
    let ds = load_dataset(cfg)?;
    let (n, m) = (ds.n_cols(), ds.n_rows());
    match cfg.model {
        ModelKind::Lasso => {
            let base = LassoProblem::from_dataset(&ds, 0.0)?;
            let lambda = match cfg.regularization {
                Regularization::Absolute(l) => l,
                Regularization::RatioOfMax(r) => r * base.lambda_max(),
            };
            Ok(Built { problem: Box::new(base.with_lambda(lambda)?), n, m, lambda })
        }
        _ => {
            let Regularization::Absolute(lambda) = cfg.regularization else {
                unreachable!("ratio is rejected for logreg at resolution")
            };
            Ok(Built { problem: Box::new(LogRegProblem::from_dataset(&ds, lambda)?), n, m, lambda })
        }
    }
}
