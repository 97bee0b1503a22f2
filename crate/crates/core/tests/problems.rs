mod common;

use common::{prox_gradient, Dense, DenseLasso, DenseLogistic};
use proptest::prelude::*;
use restarted_approx::data::{synth_lasso, synth_logistic};
use restarted_approx::problems::{
    soft_threshold, CompositeProblem, LassoProblem, LogRegProblem, Penalty, QuadraticProblem,
};

fn finite_difference_check<P: CompositeProblem>(p: &P, x: &[f64], tol: f64) {
    let g = p.gradient(x).unwrap();
    for i in 0..p.dim() {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let fd = (p.f_value(&xp).unwrap() - p.f_value(&xm).unwrap()) / (2.0 * h);
        assert!((fd - g[i]).abs() <= tol * g[i].abs().max(1.0), "coord {i}: {fd} vs {}", g[i]);
        assert_eq!(p.partial_grad_at(i, x).unwrap(), g[i]);
    }
}

fn test_point(n: usize, seed: u64) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 + 1.0) * 0.731 + seed as f64).sin()).collect()
}

#[test]
fn gradients_match_finite_differences() {
    let inst = synth_lasso(15, 25, 0.4, 0.2, 1).unwrap();
    let lasso = LassoProblem::from_dataset(&inst.dataset, 0.3).unwrap();
    finite_difference_check(&lasso, &test_point(15, 0), 1e-6);

    let centered = inst.dataset.normalize_columns(true).unwrap();
    let lasso_c = LassoProblem::from_dataset(&centered, 0.3).unwrap();
    finite_difference_check(&lasso_c, &test_point(15, 1), 1e-6);

    let inst = synth_logistic(12, 30, 0.5, 0.3, 2).unwrap();
    let logreg = LogRegProblem::from_dataset(&inst.dataset, 0.5).unwrap();
    finite_difference_check(&logreg, &test_point(12, 2), 1e-6);

    let quad = QuadraticProblem::random_unit_diagonal(9, 1e-2, 3).unwrap();
    finite_difference_check(&quad, &test_point(9, 3), 1e-6);
}

#[test]
fn coordinate_lipschitz_bounds_curvature() {
    let inst = synth_logistic(10, 30, 0.5, 0.3, 7).unwrap();
    let p = LogRegProblem::from_dataset(&inst.dataset, 0.5).unwrap();
    let v = p.coordinate_lipschitz();
    let x = test_point(10, 4);
    for i in 0..10 {
        for t in [-3.0, -0.5, 0.1, 2.0] {
            let mut y = x.clone();
            y[i] += t;
            let lhs = p.f_value(&y).unwrap();
            let rhs = p.f_value(&x).unwrap() + p.partial_grad_at(i, &x).unwrap() * t + 0.5 * v[i] * t * t;
            assert!(lhs <= rhs + 1e-12);
        }
    }
}

#[test]
fn lasso_gap_bounds_suboptimality() {
    let inst = synth_lasso(20, 30, 0.5, 0.1, 5).unwrap();
    let p = LassoProblem::from_dataset(&inst.dataset, 0.0).unwrap();
    let p = p.with_lambda(0.2 * p.lambda_max()).unwrap();
    let dense = DenseLasso { a: Dense::new(30, 20, inst.dataset.matrix.to_dense()), b: inst.dataset.labels.clone() };
    let l = dense.a.gram_norm() * 1.01;
    let (x_ref, f_ref) = prox_gradient(&dense, p.lambda(), l, &[0.0; 20], 100_000);
    assert!(p.duality_gap(&x_ref).unwrap() < 1e-9);
    for s in 0..20 {
        let x = test_point(20, s);
        let f = p.objective(&x).unwrap();
        assert!(p.duality_gap(&x).unwrap() >= f - f_ref - 1e-12);
    }
}

#[test]
fn logistic_gap_bounds_suboptimality() {
    let inst = synth_logistic(10, 40, 0.5, 0.5, 6).unwrap();
    let p = LogRegProblem::from_dataset(&inst.dataset, 0.2).unwrap();
    let dense = DenseLogistic {
        a: Dense::new(40, 10, inst.dataset.matrix.to_dense()),
        b: p.labels().to_vec(),
        c: p.loss_scale(),
    };
    let l = 0.25 * p.loss_scale() * dense.a.gram_norm() * 1.01;
    let (x_ref, f_ref) = prox_gradient(&dense, 1.0, l, &[0.0; 10], 200_000);
    assert!(p.duality_gap(&x_ref).unwrap() < 1e-8);
    for s in 0..20 {
        let x = test_point(10, s);
        let f = p.objective(&x).unwrap();
        assert!(p.duality_gap(&x).unwrap() >= f - f_ref - 1e-12);
    }
}

#[test]
fn quadratic_gap_with_l1() {
    let q = QuadraticProblem::random_unit_diagonal(6, 0.1, 9).unwrap();
    let n = 6;
    let rows: Vec<f64> = (0..n * n).map(|k| q.q_entry(k / n, k % n)).collect();
    let p = QuadraticProblem::new(n, &rows, q.center().to_vec(), 0.3).unwrap();
    let dense = common::DenseQuadratic { q: Dense::new(n, n, rows.clone()), center: q.center().to_vec() };
    let l = dense.q.gram_norm().sqrt() * 1.01;
    let (x_ref, f_ref) = prox_gradient(&dense, 0.3, l, &vec![0.0; n], 200_000);
    assert!(p.duality_gap(&x_ref).unwrap() < 1e-9);
    for s in 0..10 {
        let x = test_point(n, s);
        assert!(p.duality_gap(&x).unwrap() >= p.objective(&x).unwrap() - f_ref - 1e-12);
    }
}

proptest! {
    #[test]
    fn prox_step_satisfies_optimality(
        grad in -10.0f64..10.0,
        weight in 1e-3f64..100.0,
        point in -10.0f64..10.0,
        lambda in 0.0f64..5.0,
    ) {
        let pen = Penalty::L1(lambda);
        let z = pen.prox_step(grad, weight, point);
        // 0 in grad + weight (z - point) + lambda * subdiff|z|
        let r = grad + weight * (z - point);
        if z > 0.0 {
            prop_assert!((r + lambda).abs() <= 1e-9 * (1.0 + r.abs()));
        } else if z < 0.0 {
            prop_assert!((r - lambda).abs() <= 1e-9 * (1.0 + r.abs()));
        } else {
            prop_assert!(r.abs() <= lambda * (1.0 + 1e-12) + 1e-12);
        }
        // and it minimizes the one-dimensional model
        let model = |t: f64| grad * t + 0.5 * weight * (t - point).powi(2) + lambda * t.abs();
        for d in [-1e-3, 1e-3, -1.0, 1.0] {
            prop_assert!(model(z) <= model(z + d) + 1e-12);
        }
    }

    #[test]
    fn soft_threshold_is_nonexpansive(a in -50.0f64..50.0, b in -50.0f64..50.0, t in 0.0f64..10.0) {
        prop_assert!((soft_threshold(a, t) - soft_threshold(b, t)).abs() <= (a - b).abs() + 1e-13 * (1.0 + a.abs() + b.abs()));
        prop_assert!(soft_threshold(a, t).abs() <= a.abs());
    }

    #[test]
    fn gap_is_nonnegative_for_random_points(x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let inst = synth_lasso(8, 12, 0.5, 0.1, 2).unwrap();
        let p = LassoProblem::from_dataset(&inst.dataset, 0.4).unwrap();
        prop_assert!(p.duality_gap(&x).unwrap() >= 0.0);
        let inst = synth_logistic(8, 20, 0.5, 0.5, 2).unwrap();
        let q = LogRegProblem::from_dataset(&inst.dataset, 0.4).unwrap();
        prop_assert!(q.duality_gap(&x).unwrap() >= 0.0);
    }
}

#[test]
fn zero_penalty_prox_is_gradient_step() {
    assert_eq!(Penalty::Zero.prox_step(2.0, 4.0, 1.0), 0.5);
    assert_eq!(Penalty::Zero.value(&[1.0, -2.0]), 0.0);
    assert_eq!(Penalty::L1(0.5).value(&[1.0, -2.0]), 1.5);
}
