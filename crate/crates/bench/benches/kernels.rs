use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use spider_core::kernels::{green_kernel, hitting_laplace, minimal_excessive};
use spider_core::{Pole, SpiderModel, SpiderPoint};

fn kernels(c: &mut Criterion) {
    let m = SpiderModel::brownian(vec![0.2, 0.3, 0.5], 0.5).unwrap();
    let a = SpiderPoint::new(0.7, 1).unwrap();
    let b = SpiderPoint::new(1.9, 3).unwrap();
    let far = SpiderPoint::new(900.0, 2).unwrap();
    c.bench_function("green_kernel cross leg", |bn| {
        bn.iter(|| green_kernel(&m, black_box(&a), black_box(&b)).unwrap())
    });
    c.bench_function("green_kernel log space", |bn| {
        bn.iter(|| green_kernel(&m, black_box(&far), black_box(&far)).unwrap())
    });
    c.bench_function("hitting_laplace", |bn| {
        bn.iter(|| hitting_laplace(&m, black_box(&a), black_box(&b)).unwrap())
    });
    let pole = Pole::Point(b);
    c.bench_function("minimal_excessive", |bn| {
        bn.iter(|| minimal_excessive(&m, black_box(&a), &pole).unwrap())
    });
}

criterion_group!(benches, kernels);
criterion_main!(benches);
