use mfon::gibbs::{pair_from_resample, run_chain, site_conditional, Chain};
use mfon::special::bessel_ratio;
use mfon::stats::{batch_means_se, mean, standard_error};
use mfon::stein::conditional_moments;
use mfon::{
    seed_stream, ChainSettings, DerivedConstants, HeatBath, InitialState, ModelParams, SpinConfiguration, UnitVector,
};

fn derived(n: usize) -> DerivedConstants {
    DerivedConstants::new(ModelParams::new(3, 5.0, n).unwrap()).unwrap()
}

fn frozen(n: usize, seed: u64) -> (DerivedConstants, SpinConfiguration) {
    let d = derived(n);
    let mut chain = Chain::new(d, InitialState::Uniform, 0, seed_stream(seed, 0));
    chain.sweeps(50);
    (d, chain.config)
}

#[test]
fn detailed_balance_on_an_angle_grid() {
    // n = 2, N = 2: kernel picks a site uniformly and redraws it from
    // site_conditional; check π(a) K(a→b) = π(b) K(b→a) for one-site moves.
    let beta = 3.0;
    let m = 72;
    let angle = |k: usize| std::f64::consts::TAU * k as f64 / m as f64;
    let spin = |t: f64| UnitVector::new(vec![t.cos(), t.sin()]).unwrap();
    let gibbs = |a: usize, b: usize| (beta / 4.0 * (2.0 + 2.0 * (angle(a) - angle(b)).cos())).exp();
    let z: f64 = (0..m).flat_map(|a| (0..m).map(move |b| gibbs(a, b))).sum();

    // normalized on-grid conditional of site 0 given site 1 at angle index b
    let cond = |b: usize, target: usize| {
        let cfg = SpinConfiguration::from_spins(&[spin(0.0), spin(angle(b))]).unwrap();
        let law = site_conditional(&cfg, 0, beta);
        let r = law.direction.as_slice();
        let w = |k: usize| (law.kappa * (angle(k).cos() * r[0] + angle(k).sin() * r[1])).exp();
        w(target) / (0..m).map(w).sum::<f64>()
    };
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for a2 in 0..m {
            for b in (0..m).step_by(7) {
                let fwd = gibbs(a, b) / z * 0.5 * cond(b, a2);
                let bwd = gibbs(a2, b) / z * 0.5 * cond(b, a);
                worst = worst.max((fwd - bwd).abs() / fwd.max(bwd));
            }
        }
    }
    assert!(worst <= 1e-3, "reversibility residual {worst}");
}

#[test]
fn two_site_chain_has_the_right_relative_angle() {
    // under the Gibbs law cos(θ1 - θ2) is the mean resultant of vMF(β/2)
    let beta = 5.0;
    let d = DerivedConstants::new(ModelParams::new(2, beta, 2).unwrap()).unwrap();
    let mut chain = Chain::new(d, InitialState::Uniform, 0, seed_stream(12, 0));
    chain.sweeps(100);
    let mut c = Vec::with_capacity(200_000);
    for _ in 0..200_000 {
        chain.sweep();
        let (a, b) = (chain.config.spin(0), chain.config.spin(1));
        c.push(a[0] * b[0] + a[1] * b[1]);
    }
    let want = bessel_ratio(beta / 2.0, 2).unwrap();
    let got = mean(&c);
    assert!((got - want).abs() <= 4.0 * batch_means_se(&c, 100), "{got} vs {want}");
}

#[test]
fn site_resampling_matches_the_conditional_mean_resultant() {
    let (d, cfg) = frozen(12, 21);
    let mut hb = HeatBath::new(3, d.params.beta);
    let mut rng = seed_stream(22, 0);
    for i in [0, 5, 11] {
        let law = site_conditional(&cfg, i, d.params.beta);
        let mut work = cfg.clone();
        let mut dots = Vec::with_capacity(50_000);
        for _ in 0..50_000 {
            hb.step(&mut work, i, &mut rng);
            dots.push(law.direction.dot(work.spin(i)));
        }
        let want = bessel_ratio(law.kappa, 3).unwrap();
        assert!((mean(&dots) - want).abs() <= 4.0 * standard_error(&dots), "site {i}");
    }
}

#[test]
fn conditional_moments_match_brute_force() {
    for (n, seed) in [(5, 31), (10, 32), (50, 33)] {
        let (d, cfg) = frozen(n, seed);
        let (m1, m2) = conditional_moments(&cfg, &d).unwrap();
        let mut hb = HeatBath::new(3, d.params.beta);
        let mut rng = seed_stream(seed, 1);
        let deltas: Vec<f64> = (0..100_000).map(|_| hb.draw_pair(&cfg, &d, &mut rng).unwrap().2).collect();
        let sq: Vec<f64> = deltas.iter().map(|x| x * x).collect();
        assert!((mean(&deltas) - m1).abs() <= 4.0 * standard_error(&deltas), "n={n} mean");
        assert!((mean(&sq) - m2).abs() <= 4.0 * standard_error(&sq), "n={n} second");
        assert!(m2 >= 0.0 && m2 <= d.delta_cap * d.delta_cap);
    }
}

#[test]
fn pair_cap_holds_along_a_chain() {
    let d = derived(100);
    assert!((d.delta_cap - 0.759_150_622_258_037_5).abs() < 1e-12);
    let mut chain = Chain::new(d, InitialState::Ordered, 0, seed_stream(40, 0));
    let mut worst: f64 = 0.0;
    for k in 0..200_000 {
        if k % 200 == 0 {
            chain.sweep();
        }
        let (_, _, delta, _) = chain.draw_pair().unwrap();
        worst = worst.max(delta.abs());
    }
    assert!(worst <= d.delta_cap, "{worst}");
}

#[test]
fn identical_resample_has_zero_delta() {
    let (d, cfg) = frozen(8, 50);
    let same = cfg.spin(3).to_vec();
    let (w, w_prime, delta) = pair_from_resample(&cfg, 3, &same, &d).unwrap();
    assert_eq!(delta, 0.0);
    assert_eq!(w, w_prime);
}

#[test]
fn single_spin_resampling_is_uniform() {
    let d = DerivedConstants::new(ModelParams::new(3, 5.0, 1).unwrap()).unwrap();
    let cfg = SpinConfiguration::ordered(3, 1);
    assert_eq!(site_conditional(&cfg, 0, 5.0).kappa, 0.0);
    let mut hb = HeatBath::new(3, 5.0);
    let mut rng = seed_stream(51, 0);
    let mut work = cfg.clone();
    let xs: Vec<f64> = (0..50_000)
        .map(|_| {
            hb.step(&mut work, 0, &mut rng);
            work.spin(0)[0]
        })
        .collect();
    assert!(mean(&xs).abs() <= 4.0 * standard_error(&xs));
    // W is pinned at √1 (β²/b² - 1) since |S| = 1
    assert!((d.w_from_norm2(1.0) - (25.0 / (d.b * d.b) - 1.0)).abs() < 1e-14);
}

#[test]
fn concentration_near_the_fixed_point() {
    let d = derived(1024);
    let mut chain = Chain::new(d, InitialState::Ordered, 0, seed_stream(60, 0));
    chain.sweeps(1000);
    let mut xs = Vec::new();
    for _ in 0..100 {
        chain.sweep();
        xs.push(5.0 * chain.config.total_norm() / 1024.0);
    }
    assert!((mean(&xs) - d.b).abs() <= 0.05, "{}", mean(&xs));
}

#[test]
fn record_accounting_and_determinism() {
    let d = derived(16);
    let settings = ChainSettings {
        sweeps: 37,
        burn_in: 0,
        thin: 1,
        init: InitialState::Ordered,
    };
    let a = run_chain(&d, &settings, 3, seed_stream(70, 3)).unwrap();
    let b = run_chain(&d, &settings, 3, seed_stream(70, 3)).unwrap();
    assert_eq!(a.len(), 37);
    assert_eq!(a, b);
    let c = run_chain(&d, &settings, 4, seed_stream(70, 4)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn incremental_total_stays_accurate() {
    let d = derived(40);
    let mut chain = Chain::new(d, InitialState::Uniform, 0, seed_stream(80, 0));
    chain.sweeps(2000);
    assert!(chain.config.cache_drift() <= 1e-8);
    assert!(chain.config.total_norm() <= 40.0);
}
