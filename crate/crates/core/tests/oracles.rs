//! Frozen reference values.

use spider_core::kernels::{green_kernel, hitting_laplace, minimal_excessive_function};
use spider_core::*;

fn m3() -> SpiderModel {
    SpiderModel::brownian_uniform(3, 0.5).unwrap()
}

#[test]
fn vertex_green_kernel_is_one_over_theta() {
    for r in [0.5, 2.0, 8.0] {
        let m = SpiderModel::brownian_uniform(3, r).unwrap();
        let g = green_kernel(&m, &SpiderPoint::VERTEX, &SpiderPoint::VERTEX)
            .unwrap()
            .value;
        assert!((g - 1.0 / (2.0 * r).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn two_legs_reduce_to_the_line() {
    let m = SpiderModel::brownian_uniform(2, 0.5).unwrap();
    let a = SpiderPoint::new(0.8, 1).unwrap();
    let b = SpiderPoint::new(1.3, 2).unwrap();
    let g = green_kernel(&m, &a, &b).unwrap().value;
    assert!((g - (-2.1f64).exp()).abs() < 1e-12);
    let h = hitting_laplace(&m, &a, &b).unwrap();
    assert!((h - (-2.1f64).exp()).abs() < 1e-12);
}

#[test]
fn linear_thresholds_and_value() {
    let s = solve_threshold_system(&m3(), &PayoffFamily::Linear(vec![1.0, 2.0, 3.0]), &Default::default()).unwrap();
    let want = [1.481_582_57, 1.204_071_75, 1.062_750_26];
    for (z, w) in s.thresholds.iter().zip(want) {
        assert!((z - w).abs() < 1e-8, "{z}");
    }
    let v0 = s.solution.value.eval(&SpiderPoint::VERTEX);
    assert!((v0 - 1.341_462_579_85).abs() < 1e-9, "{v0}");
}

#[test]
fn quadratic_thresholds() {
    let s = solve_threshold_system(
        &m3(),
        &PayoffFamily::Quadratic(vec![1.0, 2.0, 3.0]),
        &Default::default(),
    )
    .unwrap();
    for (z, w) in s.thresholds.iter().zip([2.169_870_84, 2.065_432_31, 2.022_496_05]) {
        assert!((z - w).abs() < 1e-8, "{z}");
    }
}

#[test]
fn example71_regimes() {
    for (r, case) in [
        (8.0, Example71Case::A),
        (2.0, Example71Case::B),
        (0.125, Example71Case::C),
    ] {
        let s = solve_spider_example71(&SpiderModel::brownian_uniform(3, r).unwrap()).unwrap();
        assert_eq!(s.case, case);
        let theta = (2.0 * r).sqrt();
        if let Some(x2) = s.x2 {
            assert!((x2 - (2.0 - 1.0 / theta)).abs() < 1e-8);
        }
        if let Some(x3) = s.x3 {
            assert!((x3 - (0.5 - 1.0 / theta)).abs() < 1e-8);
        }
    }
}

#[test]
fn phi_has_a_unit_vertex_atom() {
    let m = m3();
    let mu = representing_measure_at_vertex(&m, &kernels::phi_function(&m)).unwrap();
    assert!((mu.vertex_atom - 1.0).abs() < 1e-8);
    for leg in 1..=3 {
        assert!(mu.tail(0.0, leg).abs() < 1e-8);
    }
}

#[test]
fn single_pole_has_unit_atom() {
    let m = m3();
    let pole = Pole::Point(SpiderPoint::new(0.9, 2).unwrap());
    let f = minimal_excessive_function(&m, pole).unwrap();
    let mu = representing_measure_at_vertex(&m, &f).unwrap();
    assert!((mu.atom_at(0.9, 2) - 1.0).abs() < 1e-6);
    assert!((mu.total_mass() - 1.0).abs() < 1e-6);
}

#[test]
fn verification_battery_passes_on_both_families() {
    let m = m3();
    for fam in [
        PayoffFamily::Linear(vec![1.0, 2.0, 3.0]),
        PayoffFamily::Quadratic(vec![1.0, 2.0, 3.0]),
    ] {
        let s = solve_threshold_system(&m, &fam, &Default::default()).unwrap();
        let grid = osp::default_grid(&s.solution.region);
        let rep = verify_solution(&m, &fam.payoff(), &s.solution, &grid, 1e-4).unwrap();
        assert!(rep.all_passed(), "{:#?}", rep.checks);
    }
}
