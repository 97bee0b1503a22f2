use restarted_approx::rates::{
    advantage_window, d_sequence_violation, figure1_table, ln_rho_sweep, log_spaced_grid,
    per_iter_rates, rho_bound, rho_bound_sweep, rho_exact, rho_exact_sweep, rho_next, sigma_sequence,
    write_figure1_csv, RateKind, RateQuery, StandardCdRate, LOG_SPACE_THRESHOLD,
};
use restarted_approx::theta::ThetaSequence;

const THETAS: [f64; 3] = [0.5, 0.1, 0.01];
const MUS: [f64; 3] = [1e-1, 1e-2, 1e-3];

#[test]
fn exact_factor_below_bound_on_grid() {
    for theta0 in THETAS {
        for mu in MUS {
            let rho = rho_exact_sweep(theta0, mu, 10_000).unwrap();
            let bound = rho_bound_sweep(theta0, mu, 10_000).unwrap();
            for (i, (&r, &b)) in rho.iter().zip(&bound).enumerate() {
                let k = i + 1;
                assert!(r > 0.0 && r <= 1.0 + 1e-12, "rho out of range at {theta0} {mu} {k}");
                assert!(r <= b * (1.0 + 1e-12), "theta0={theta0} mu={mu} K={k}: {r} > {b}");
            }
            for k in [1u64, 17, 9999] {
                let direct = rho_bound(&RateQuery::new(theta0, mu, k).unwrap());
                assert_eq!(direct, bound[k as usize - 1]);
            }
        }
    }
}

#[test]
fn sigma_between_zero_and_theta0() {
    for theta0 in THETAS {
        for mu in [1e-1, 1e-3] {
            for k in [1u64, 2, 10, 100, 1000] {
                let s = sigma_sequence(&RateQuery::new(theta0, mu, k).unwrap()).unwrap();
                assert_eq!(s.len(), k as usize);
                let (inner, last) = s.split_at(k as usize - 1);
                assert!(inner.iter().all(|&x| (0.0..=theta0).contains(&x)), "{theta0} {mu} {k}");
                assert!((0.0..1.0).contains(&last[0]));
            }
        }
    }
}

#[test]
fn last_sigma_exceeds_theta0_for_long_periods() {
    // sigma^K_K -> 1 as theta_{K-1} -> 0, so the bound sigma <= theta0 only
    // holds for k < K
    let q = RateQuery::new(0.5, 0.1, 100).unwrap();
    let s = sigma_sequence(&q).unwrap();
    assert!(s[99] > 0.5);
    assert_eq!(sigma_sequence(&RateQuery::new(0.5, 0.1, 1).unwrap()).unwrap()[0], 0.5 * 0.1 / 1.1);
}

#[test]
fn sigma_vanishes_as_mu_goes_to_zero() {
    let s = sigma_sequence(&RateQuery::new(0.1, 1e-14, 50).unwrap()).unwrap();
    assert!(s.iter().all(|&x| x < 1e-13));
}

#[test]
fn rho_small_mu_limit() {
    let (theta0, k) = (0.2, 30u64);
    let rho = rho_exact(&RateQuery::new(theta0, 1e-14, k).unwrap()).unwrap();
    let mut t = ThetaSequence::from_theta0(theta0).unwrap();
    t.extend_to(k as usize);
    let t = t.as_slice();
    let tm1 = theta0 * theta0 / (1.0 - theta0);
    let s: f64 = (0..k as usize).map(|l| tm1 / t[l]).sum();
    let limit = t[k as usize - 1].powi(2) / tm1 * (1.0 + s);
    assert!((rho - limit).abs() < 1e-10);
    assert!(limit <= 1.0 + 1e-12);
}

#[test]
fn matches_recurrence_between_consecutive_k() {
    for theta0 in THETAS {
        for mu in MUS {
            let rho = rho_exact_sweep(theta0, mu, 2000).unwrap();
            let mut t = ThetaSequence::from_theta0(theta0).unwrap();
            for k in 1..2000usize {
                let next = rho_next(theta0, mu, t.at(k), rho[k - 1]);
                assert!((next - rho[k]).abs() <= 1e-10 * rho[k], "{theta0} {mu} {k}");
            }
        }
    }
}

#[test]
fn direct_and_log_space_agree_at_threshold() {
    let q = RateQuery::new(0.1, 1e-3, LOG_SPACE_THRESHOLD).unwrap();
    let direct = rho_exact(&q).unwrap();
    let logged = ln_rho_sweep(0.1, 1e-3, LOG_SPACE_THRESHOLD).unwrap().last().unwrap().exp();
    assert!((direct - logged).abs() <= 1e-10 * direct);
    // beyond the threshold the log-space path is used and stays finite
    let far = rho_exact(&RateQuery::new(0.01, 1e-1, 200_000).unwrap()).unwrap();
    assert!(far > 0.0 && far < 1.0);
}

#[test]
fn bound_contracts_once_k_reaches_n_over_tau() {
    for n in [5usize, 10, 40] {
        let theta0 = 1.0 / n as f64;
        for k in 1..=4 * n as u64 {
            let q = RateQuery::new(theta0, 1e-2, k).unwrap();
            let mut t = ThetaSequence::from_theta0(theta0).unwrap();
            let tk = t.at(k as usize - 1);
            let strict = 2.0 * tk * tk < theta0 * theta0 / (1.0 - theta0);
            assert_eq!(rho_bound(&q) < 1.0, strict, "n={n} K={k}");
            if k >= n as u64 {
                assert!(strict, "n={n} K={k}");
            }
        }
    }
    let q = RateQuery::new(0.3, 1e-15, 5).unwrap();
    assert!((rho_bound(&q) - 1.0).abs() < 1e-13);
}

#[test]
fn proof_sequence_is_feasible() {
    for theta0 in THETAS {
        for mu in MUS {
            for k in [1u64, 5, 50, 500] {
                let q = RateQuery::new(theta0, mu, k).unwrap();
                assert_eq!(d_sequence_violation(&q).unwrap(), None, "{theta0} {mu} {k}");
            }
        }
    }
}

#[test]
fn per_iteration_rates() {
    let q = RateQuery::new(0.1, 1e-2, 1).unwrap();
    let r = per_iter_rates(&q, &StandardCdRate).unwrap();
    assert!((r.approx_bound - rho_bound(&q)).abs() < 1e-15);
    assert!((r.one_minus_cd - 0.1 * 1e-2 / 1.01).abs() < 1e-18);
    // faster for larger mu
    let mut prev = 1.0;
    for mu in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
        let r = per_iter_rates(&RateQuery::new(0.1, mu, 200).unwrap(), &StandardCdRate).unwrap();
        assert!(r.approx_bound < prev);
        assert!(r.approx_exact.unwrap() <= r.approx_bound * (1.0 + 1e-12));
        prev = r.approx_bound;
    }
    let custom = |_: f64, _: f64| 0.5;
    let r = per_iter_rates(&q, &custom).unwrap();
    assert_eq!(r.cd, 0.5);
}

#[test]
fn figure1_regime_window() {
    let grid = log_spaced_grid(1, 1_000_000, 40);
    let rows = figure1_table(1e-3, 10, 1, &grid, &StandardCdRate).unwrap();
    let (lo, hi) = advantage_window(&rows, RateKind::Bound).unwrap();
    assert!(lo <= 100 && hi >= 10_000, "window [{lo}, {hi}]");
    assert!((25..=100).contains(&lo), "lower end {lo}");
    assert!((45_000..=180_000).contains(&hi), "upper end {hi}");
    for row in rows.iter().step_by(37) {
        let r = per_iter_rates(&RateQuery::new(0.1, 1e-3, row.k).unwrap(), &StandardCdRate).unwrap();
        assert!((r.one_minus_approx_bound - row.one_minus_rate_restart_bound).abs() <= 1e-12 * row.one_minus_rate_restart_bound.abs());
        assert!((r.one_minus_approx_exact.unwrap() - row.one_minus_rate_restart_exact).abs() <= 1e-9 * row.one_minus_rate_restart_exact.abs());
    }
    let mut csv = Vec::new();
    write_figure1_csv(&rows[..3], &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("K,one_minus_rate_restart_bound,one_minus_rate_restart_exact,one_minus_rate_cd\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn single_iteration_factor_closed_form() {
    for theta0 in THETAS {
        for mu in MUS {
            let rho = rho_exact(&RateQuery::new(theta0, mu, 1).unwrap()).unwrap();
            let expect = (1.0 + (1.0 - theta0) * mu) / (1.0 + mu);
            assert!((rho - expect).abs() < 1e-12, "{theta0} {mu}: {rho} vs {expect}");
        }
    }
}
