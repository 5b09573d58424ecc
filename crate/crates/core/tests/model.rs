use mfon::model::{delta_cap, hamiltonian, pair_lambda, solve_b, variance_b2, w_statistic};
use mfon::special::{bessel_ratio, bessel_ratio_deriv};
use mfon::{DerivedConstants, Error, ModelParams, SpinConfiguration, UnitVector};

// Frozen from 40-digit evaluations with the N = 3 closed form.
const B: f64 = 3.629_409_935_955_998;
const B2: f64 = 0.874_520_662_178_670_2;
const ONE_MINUS_BETA_FP: f64 = 0.634_523_296_643_224;

fn heisenberg(n: usize) -> DerivedConstants {
    DerivedConstants::new(ModelParams::new(3, 5.0, n).unwrap()).unwrap()
}

#[test]
fn fixed_point_residual_and_variance_forms() {
    for dim in 2..=8 {
        let nf = dim as f64;
        for k in 1..=12 {
            let beta = nf + 3.0 * nf * k as f64 / 12.0;
            let b = solve_b(dim, beta).unwrap();
            let resid = b - beta * bessel_ratio(b, dim).unwrap();
            assert!(resid.abs() <= 1e-12 * b.max(1.0), "N={dim} beta={beta}: {resid}");
            let fp = bessel_ratio_deriv(b, dim).unwrap();
            assert!(fp > 0.0 && fp < 1.0 / (nf - 1.0));
            assert!(beta * fp < 1.0);
            let direct = 4.0 * beta * beta * fp / ((1.0 - beta * fp) * b * b);
            let b2 = variance_b2(dim, beta, b).unwrap();
            assert!((b2 / direct - 1.0).abs() <= 1e-10, "N={dim} beta={beta}");
        }
    }
}

#[test]
fn heisenberg_values() {
    let c = heisenberg(100);
    assert!((c.b - B).abs() < 1e-12);
    assert!((c.b2 - B2).abs() < 1e-12);
    assert!((c.lambda - ONE_MINUS_BETA_FP / 100.0).abs() < 1e-15);
    assert!((c.delta_cap - 0.759_150_622_258_037_5).abs() < 1e-12);
    assert!((heisenberg(1).lambda - ONE_MINUS_BETA_FP).abs() < 1e-13);
    assert_eq!(pair_lambda(&c.params, &c).unwrap(), c.lambda);
}

#[test]
fn root_increases_with_beta_and_vanishes_at_criticality() {
    let mut last = 0.0;
    for k in 1..=40 {
        let beta = 3.0 + 0.1 * k as f64;
        let b = solve_b(3, beta).unwrap();
        assert!(b > last);
        last = b;
    }
    let near = solve_b(3, 3.0 + 1e-6).unwrap();
    assert!(near > 0.0 && near < 1e-2, "{near}");
    assert!(matches!(solve_b(2, 1.5), Err(Error::Parameter(_))));
    assert!(matches!(solve_b(3, 3.0), Err(Error::Parameter(_))));
}

#[test]
fn near_critical_variance_is_finite() {
    let p = ModelParams::new(3, 3.05, 10).unwrap();
    assert!(p.near_critical());
    let c = DerivedConstants::new(p).unwrap();
    assert!(c.b2.is_finite() && c.b2 > 0.0);
    assert!(!ModelParams::new(3, 5.0, 10).unwrap().near_critical());
}

#[test]
fn cap_scales_like_inverse_root_n() {
    for n in [1, 7, 100, 4096] {
        assert!((delta_cap(5.0, B, n) / delta_cap(5.0, B, 4 * n) - 2.0).abs() < 1e-14);
    }
    let mut last = 1.0;
    for n in [1, 10, 100, 1000] {
        let l = heisenberg(n).lambda;
        assert!(l > 0.0 && l < last);
        last = l;
    }
}

#[test]
fn hamiltonian_and_w_examples() {
    let e = |k| UnitVector::basis(3, k);
    let aligned = SpinConfiguration::ordered(3, 100);
    assert_eq!(hamiltonian(&aligned), -50.0);
    let c = heisenberg(100);
    assert!((w_statistic(&aligned, &c) - 8.978_765_556_450_938).abs() < 1e-10);

    let anti = SpinConfiguration::from_spins(&[
        e(0),
        UnitVector::new(vec![-1.0, 0.0, 0.0]).unwrap(),
    ])
    .unwrap();
    assert_eq!(hamiltonian(&anti), 0.0);
    assert!((w_statistic(&anti, &heisenberg(2)) + 2f64.sqrt()).abs() < 1e-15);

    let ortho = SpinConfiguration::from_spins(&[e(0), e(1), e(2)]).unwrap();
    assert!((hamiltonian(&ortho) + 0.5).abs() < 1e-15);

    // |S| = n b / β gives W = 0
    let d = heisenberg(64);
    assert!(d.w_from_norm2(d.typical_radius().powi(2)).abs() < 1e-13);
}

#[test]
fn bad_parameters() {
    assert!(ModelParams::new(1, 5.0, 10).is_err());
    assert!(ModelParams::new(3, 5.0, 0).is_err());
    assert!(ModelParams::new(3, f64::NAN, 10).is_err());
    assert!(ModelParams::new(3, 2.9, 10).is_err());
}
