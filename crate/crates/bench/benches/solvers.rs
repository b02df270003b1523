use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spider_core::osp::{resolvent_apply, Restrict};
use spider_core::{
    reward_decomposition, simulate_discounted_stop, solve_spider_example71, solve_threshold_system, LegFunction,
    PayoffFamily, ResidualPath, SimConfig, SpiderModel, SpiderPoint, ThresholdOptions,
};

fn solvers(c: &mut Criterion) {
    let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
    let lin = PayoffFamily::Linear(vec![1.0, 2.0, 3.0]);
    let quad = PayoffFamily::Quadratic(vec![1.0, 2.0, 3.0]);
    c.bench_function("threshold linear closed form", |b| {
        b.iter(|| solve_threshold_system(&m, black_box(&lin), &ThresholdOptions::default()).unwrap())
    });
    c.bench_function("threshold quadratic closed form", |b| {
        b.iter(|| solve_threshold_system(&m, black_box(&quad), &ThresholdOptions::default()).unwrap())
    });
    let by_quad = ThresholdOptions {
        path: Some(ResidualPath::Quadrature),
        ..Default::default()
    };
    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("threshold linear quadrature", |b| {
        b.iter(|| solve_threshold_system(&m, black_box(&lin), &by_quad).unwrap())
    });
    slow.bench_function("example71 r = 0.5", |b| {
        b.iter(|| solve_spider_example71(black_box(&m)).unwrap())
    });
    let dec = reward_decomposition(&m, &LegFunction::example71()).unwrap();
    slow.bench_function("resolvent_apply example71 density", |b| {
        b.iter(|| resolvent_apply(&m, &dec.f_density, Restrict::All, black_box(&SpiderPoint::VERTEX)).unwrap())
    });
    let s = solve_threshold_system(&m, &lin, &ThresholdOptions::default()).unwrap();
    let cfg = SimConfig {
        step: 0.02,
        paths: 10_000,
        horizon: 20.0,
        seed: 1,
        antithetic: true,
    };
    let g = lin.payoff();
    slow.bench_function("simulate 10k paths h = 0.02", |b| {
        b.iter(|| simulate_discounted_stop(&m, &SpiderPoint::VERTEX, &s.solution.region, &g, black_box(&cfg)).unwrap())
    });
    slow.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
