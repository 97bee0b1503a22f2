use restarted_approx::theta::{next_theta, theta_bounds, ThetaSequence};

const THETA0: [f64; 4] = [1.0, 0.5, 0.1, 1e-3];

#[test]
fn recurrence_residual_is_tiny() {
    for theta0 in THETA0 {
        let mut t = ThetaSequence::from_theta0(theta0).unwrap();
        t.extend_to(100_000);
        for w in t.as_slice().windows(2) {
            let (a, b) = (w[0], w[1]);
            // b is the positive root of X^2 + a^2 X - a^2
            let residual = b * b + a * a * b - a * a;
            assert!(residual.abs() <= 1e-10 * a * a, "theta0={theta0}: {residual:e}");
            let identity = (1.0 - b) / (b * b) - 1.0 / (a * a);
            assert!(identity.abs() <= 1e-10 / (a * a));
        }
    }
}

#[test]
fn sandwich_bounds_hold() {
    for theta0 in THETA0 {
        let mut t = ThetaSequence::from_theta0(theta0).unwrap();
        t.extend_to(100_000);
        for (k, &th) in t.as_slice().iter().enumerate().take(100_001) {
            let (lo, hi) = theta_bounds(theta0, k);
            assert!(th >= lo * (1.0 - 1e-12) && th <= hi * (1.0 + 1e-12), "theta0={theta0} k={k}");
        }
    }
}

#[test]
fn sequence_is_decreasing_and_positive() {
    for theta0 in THETA0 {
        let mut t = ThetaSequence::from_theta0(theta0).unwrap();
        t.extend_to(10_000);
        assert!(t.as_slice().windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }
}

#[test]
fn rationalized_step_is_stable_for_tiny_theta() {
    let th = 1e-12;
    let step = next_theta(th);
    assert!((step - th * (1.0 - th / 2.0)).abs() <= 1e-24);
    let mut t = ThetaSequence::from_theta0(1e-9).unwrap();
    assert!(t.at(1) < 1e-9 && t.at(1) > 0.99e-9);
}

#[test]
fn theta_minus1_matches_identity() {
    for theta0 in [0.5, 0.1, 1e-3] {
        let t = ThetaSequence::from_theta0(theta0).unwrap();
        let tm1 = t.theta_minus1_sq().unwrap();
        // theta0 is the positive root of X^2 + tm1 X - tm1
        assert!((theta0 * theta0 + tm1 * theta0 - tm1).abs() < 1e-15);
    }
    assert!(ThetaSequence::from_theta0(1.0).unwrap().theta_minus1_sq().is_err());
    assert!(ThetaSequence::from_theta0(0.0).is_err());
    assert!(ThetaSequence::from_theta0(1.5).is_err());
}
