use spider_core::osp::{resolvent_apply, Restrict};
use spider_core::simulator::vertex_leg_frequencies;
use spider_core::*;

fn cfg(step: f64, paths: usize, horizon: f64, seed: u64) -> SimConfig {
    SimConfig {
        step,
        paths,
        horizon,
        seed,
        antithetic: true,
    }
}

#[test]
fn one_sided_rule_on_two_legs() {
    // two legs glue into a line; stopping at z on leg 1 from distance d gives z e^{-theta d}
    let m = SpiderModel::brownian_uniform(2, 0.5).unwrap();
    let z = 1.2;
    let region = StoppingRegion::empty(2).with_interval(1, z, f64::INFINITY).unwrap();
    let g = LegFunction::linear(vec![1.0, 1.0]);
    let start = SpiderPoint::new(0.4, 2).unwrap();
    let e = simulate_discounted_stop(&m, &start, &region, &g, &cfg(0.02, 20_000, 40.0, 1)).unwrap();
    let want = z * (-(z + 0.4f64)).exp();
    assert!(e.z_score(want) < 3.0, "{} vs {want} (se {})", e.mean, e.std_error);
}

#[test]
fn resolvent_matches_quadrature() {
    let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
    let start = SpiderPoint::new(0.5, 2).unwrap();
    let leg1 = LegFunction::new(3, |x, leg| if leg == 1 && x > 0.0 { 1.0 } else { 0.0 });
    let phi = kernels::phi_function(&m);
    for f in [leg1, phi] {
        let e = simulate_resolvent(&m, &start, &f, &cfg(0.05, 4_000, 30.0, 2)).unwrap();
        let want = resolvent_apply(&m, &f, Restrict::All, &start).unwrap();
        assert!(e.z_score(want) < 3.0, "{} vs {want} (se {})", e.mean, e.std_error);
    }
}

#[test]
fn halving_the_step_is_consistent() {
    let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
    let fam = PayoffFamily::Linear(vec![1.0, 2.0, 3.0]);
    let s = solve_threshold_system(&m, &fam, &Default::default()).unwrap();
    let g = fam.payoff();
    let run = |h| {
        simulate_discounted_stop(
            &m,
            &SpiderPoint::VERTEX,
            &s.solution.region,
            &g,
            &cfg(h, 40_000, 30.0, 3),
        )
        .unwrap()
    };
    let (a, b) = (run(0.02), run(0.01));
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 2.0 * se, "{} vs {}", a.mean, b.mean);
}

#[test]
fn leg_choices_follow_p() {
    let m = SpiderModel::brownian(vec![0.2, 0.3, 0.5], 1.0).unwrap();
    let counts = vertex_leg_frequencies(&m, 200_000, 11);
    let total: u64 = counts.iter().sum();
    for (c, p) in counts.iter().zip(m.probabilities()) {
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        assert!((*c as f64 - total as f64 * p).abs() < 4.0 * sd);
    }
}

#[test]
fn drifted_legs_are_not_simulated() {
    let m = SpiderModel::new(
        vec![0.5, 0.5],
        0.5,
        std::sync::Arc::new(DriftedBrownian::new(1.0).unwrap()),
    )
    .unwrap();
    assert!(simulate_hitting_laplace(
        &m,
        &SpiderPoint::VERTEX,
        &SpiderPoint::new(1.0, 1).unwrap(),
        &SimConfig::default()
    )
    .is_err());
}
