use proptest::prelude::*;
use spider_core::kernels::{green_kernel, hitting_laplace, martin_mixture};
use spider_core::*;

fn probs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect()
    })
}

fn model() -> impl Strategy<Value = SpiderModel> {
    (2usize..5, 0.05f64..5.0)
        .prop_flat_map(|(n, r)| (probs(n), Just(r)))
        .prop_map(|(p, r)| SpiderModel::brownian(p, r).unwrap())
}

fn point(n: usize) -> impl Strategy<Value = SpiderPoint> {
    (0.0f64..4.0, 1..=n).prop_map(|(x, leg)| {
        if x < 0.05 {
            SpiderPoint::VERTEX
        } else {
            SpiderPoint::new(x, leg).unwrap()
        }
    })
}

fn model_and_points() -> impl Strategy<Value = (SpiderModel, SpiderPoint, SpiderPoint)> {
    model().prop_flat_map(|m| {
        let n = m.n();
        (Just(m), point(n), point(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_kernel_is_symmetric((m, a, b) in model_and_points()) {
        let ab = green_kernel(&m, &a, &b).unwrap().value;
        let ba = green_kernel(&m, &b, &a).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        prop_assert!(ab > 0.0);
    }

    #[test]
    fn green_kernel_factors_through_hitting((m, a, b) in model_and_points()) {
        // g(a, b) = E_a[exp(-r H_b)] g(b, b)
        let gab = green_kernel(&m, &a, &b).unwrap().value;
        let gbb = green_kernel(&m, &b, &b).unwrap().value;
        let h = hitting_laplace(&m, &a, &b).unwrap();
        prop_assert!((gab - h * gbb).abs() <= 1e-10 * gab.max(1.0));
        prop_assert!(h > 0.0 && h <= 1.0 + 1e-12);
    }

    #[test]
    fn point_syntax_round_trips(x in 0.0f64..100.0, leg in 1usize..9) {
        let p = if x == 0.0 { SpiderPoint::VERTEX } else { SpiderPoint::new(x, leg).unwrap() };
        let q: SpiderPoint = p.to_string().parse().unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn mixtures_recover_their_weights(
        m in model(),
        raw in prop::collection::vec((0.0f64..1.0, 0.2f64..3.0, 0usize..8), 1..4),
        vertex_w in 0.0f64..1.0,
    ) {
        let n = m.n();
        let mut comps = vec![(Pole::Point(SpiderPoint::VERTEX), vertex_w)];
        for &(w, y, leg) in &raw {
            let leg = leg % n + 1;
            comps.push((Pole::Point(SpiderPoint::new(y, leg).unwrap()), w));
        }
        let total: f64 = comps.iter().map(|c| c.1).sum();
        prop_assume!(total > 1e-3);
        for c in &mut comps {
            c.1 /= total;
        }
        let f = martin_mixture(&m, &comps).unwrap();
        let mu = representing_measure_at_vertex(&m, &f).unwrap();
        prop_assert!((mu.vertex_atom - comps[0].1).abs() < 1e-5);
        for leg in 1..=n {
            let want: f64 = comps[1..].iter().filter(|c| matches!(c.0, Pole::Point(p) if p.leg == leg)).map(|c| c.1).sum();
            prop_assert!((mu.tail(0.0, leg) - want).abs() < 1e-5, "leg {}: {} vs {}", leg, mu.tail(0.0, leg), want);
        }
    }

    #[test]
    fn thresholds_are_scale_invariant(k in 0.1f64..10.0) {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let a = solve_threshold_system(&m, &PayoffFamily::Linear(vec![1.0, 2.0, 3.0]), &Default::default()).unwrap();
        let b = solve_threshold_system(&m, &PayoffFamily::Linear(vec![k, 2.0 * k, 3.0 * k]), &Default::default()).unwrap();
        for (x, y) in a.thresholds.iter().zip(&b.thresholds) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn larger_coefficient_stops_earlier(a2 in 1.1f64..4.0) {
        let m = SpiderModel::brownian_uniform(2, 0.5).unwrap();
        let s = solve_threshold_system(&m, &PayoffFamily::Linear(vec![1.0, a2]), &Default::default()).unwrap();
        prop_assert!(s.thresholds[1] < s.thresholds[0]);
        prop_assert!(s.solution.diagnostics.majorant_min_gap > -1e-10);
    }

    #[test]
    fn harmonic_functions_are_excessive(m in model(), w in prop::collection::vec(0.05f64..2.0, 4)) {
        let a: Vec<f64> = w[..m.n()].to_vec();
        let h = kernels::harmonic(&m, &a).unwrap();
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.1).collect();
        let rep = is_excessive(&m, &h, &grid, ExcessiveTolerances::default());
        prop_assert!(rep.excessive, "{:?}", rep.gluing);
    }
}
