use restarted_approx::restart::{
    k_alpha, k_star, k_star_general, n_star, schedule_log_grid, schedule_variable,
    variable_complexity, RestartSchedule,
};

#[test]
fn variable_schedule_structure_exhaustively() {
    for k0 in [1u64, 3, 10] {
        let s = schedule_variable(k0).unwrap();
        let periods: Vec<u64> = s.periods().take((1 << 12) - 1).collect();
        assert!(periods.iter().all(|&k| k >= 1));
        for big_j in 1..=12u32 {
            // K_{2^J - 1} = 2^J K0
            assert_eq!(s.period((1 << big_j) - 1), Some(k0 << big_j));
            let prefix = &periods[..(1 << big_j) - 1];
            for j in 0..big_j {
                let count = prefix.iter().filter(|&&k| k == k0 << j).count();
                assert_eq!(count, 1 << (big_j - 1 - j), "K0={k0} J={big_j} j={j}");
            }
            // K_0 + ... + K_{2^J - 1} = (J + 2) 2^{J - 1} K0
            let total: u64 = (0..1u64 << big_j).map(|r| s.period(r).unwrap()).sum();
            assert_eq!(total * 2, (big_j as u64 + 2) * (1 << big_j) * k0);
        }
    }
}

#[test]
fn log_grid_groups() {
    for n in [2u64, 3, 4, 7, 16, 33] {
        let s = schedule_log_grid(n).unwrap();
        let periods: Vec<u64> = s.periods().take(200).collect();
        assert!(periods.len() < 200);
        assert!(periods.iter().all(|k| k.is_power_of_two() && *k >= 2));
        assert!(periods.windows(2).all(|w| w[0] <= w[1]));
        for i in 1..6u32 {
            let expect = n.div_ceil(1 << i) as usize;
            assert_eq!(periods.iter().filter(|&&k| k == 1 << i).count(), expect, "N={n} i={i}");
        }
    }
}

#[test]
fn k_alpha_and_k_star_differ_by_the_e_factor_only() {
    let alpha = (-2.0f64).exp();
    for theta0 in [1.0, 0.5, 0.1, 0.01, 1e-3] {
        for mu in [10.0, 1.0, 1e-1, 1e-2, 1e-3, 1e-5] {
            let ka = k_alpha(mu, theta0, alpha).unwrap();
            let ks = k_star(mu, theta0).unwrap();
            // K(e^-2) - K* = ceil-rounding of (2 / theta0)(e - 1)
            let gap = (2.0 / theta0) * (std::f64::consts::E - 1.0);
            assert!(ka >= ks && (ka - ks) as f64 <= gap.ceil() + 1.0, "{theta0} {mu}: {ka} {ks}");
        }
    }
}

#[test]
fn k_alpha_large_mu_limit() {
    for alpha in [0.5, 0.1, 1e-3] {
        let limit = ((2.0 / 0.2) * (1.0 / f64::sqrt(alpha) - 1.0) + 1.0).ceil() as u64;
        assert_eq!(k_alpha(1e15, 0.2, alpha).unwrap(), limit);
    }
    assert!(k_alpha(1.0, 0.2, 1.0).is_err());
    assert!(k_alpha(0.0, 0.2, 0.5).is_err());
}

#[test]
fn k_star_examples() {
    assert_eq!(k_star(1e-3, 0.1).unwrap(), 1667);
    assert_eq!(k_star(1.0, 1.0).unwrap(), 4);
    let e = std::f64::consts::E;
    assert!((n_star(1e-2, 0.1, e * 2.0, 2.0).unwrap() - k_star(1e-2, 0.1).unwrap() as f64).abs() < 1e-9);
    assert!(n_star(1e-2, 0.1, 1.0, 2.0).is_err());
}

#[test]
fn complexity_bound() {
    let c = variable_complexity(100, 100, 8f64.exp(), 1.0).unwrap();
    assert_eq!(c.bound, 3200.0);
    let c = variable_complexity(1000, 100, 8f64.exp(), 1.0).unwrap();
    assert_eq!(c.bound, (3.0 + 1.0) * 8.0 * 1000.0);
    // K0 < K*: ceil(log2(400 / 100)) = 2 extra levels
    let c = variable_complexity(100, 400, 8f64.exp(), 1.0).unwrap();
    assert_eq!(c.j, 2 + 2);
    assert_eq!(c.bound, (2.0 + 3.0 + 1.0) * 8.0 * 400.0);
    assert!(variable_complexity(10, 10, 2.0, 1.0).is_err());
}

#[test]
fn generic_restart_period() {
    assert_eq!(k_star_general(1.0, 0.0, 1.0, 0.0).unwrap(), 1);
    // mu -> infinity leaves sqrt(C_F) / e - a
    assert_eq!(k_star_general(16.0, 5.0, 1e18, 0.0).unwrap(), (4.0 / std::f64::consts::E).ceil() as i64);
    // arbitrary constants are accepted as plain numbers
    let k = k_star_general(16.0, 24.0 * 7.5, 1e-3, 2.0).unwrap();
    assert_eq!(k, ((16.0 + 180.0 / 1e-3f64).sqrt() / std::f64::consts::E - 2.0).ceil() as i64);
    assert!(k_star_general(1.0, 0.0, 1.0, 10.0).unwrap() <= 0);
}

#[test]
fn schedule_descriptions() {
    assert_eq!(RestartSchedule::fixed(7).unwrap().describe(), "fixed:7");
    assert_eq!(schedule_variable(3).unwrap().describe(), "variable:3");
    assert_eq!(schedule_log_grid(4).unwrap().describe(), "loggrid:4");
}
