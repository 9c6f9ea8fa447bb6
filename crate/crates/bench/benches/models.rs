use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use qdemux_core::{faddeeva, visibility_eq2, visibility_map, Eq2Inputs, GammaRule};

fn models(c: &mut Criterion) {
    c.bench_function("faddeeva", |b| {
        b.iter(|| faddeeva(black_box(Complex64::new(1.3, 0.7))))
    });
    c.bench_function("visibility_eq2", |b| {
        let inputs = Eq2Inputs::new(170e-12, 1.7e9, 0.5e9);
        b.iter(|| visibility_eq2(black_box(&inputs)).unwrap())
    });
    let t1: Vec<f64> = (0..200).map(|k| 50e-12 + k as f64 * 1e-12).collect();
    let fss: Vec<f64> = (0..200).map(|k| k as f64 * 0.1e-6).collect();
    let mut g = c.benchmark_group("visibility_map");
    g.sample_size(10);
    g.bench_function("200x200", |b| {
        b.iter(|| visibility_map(&t1, &fss, 0.0, GammaRule::Radiative).unwrap())
    });
    g.finish();
}

criterion_group!(benches, models);
criterion_main!(benches);
