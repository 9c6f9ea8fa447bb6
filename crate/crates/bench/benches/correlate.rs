use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qdemux_bench::random_stream;
use qdemux_core::{autocorrelate, cross_correlate, fit_lifetime, HistogramGrid};

fn correlate(c: &mut Criterion) {
    let grid = HistogramGrid::symmetric(50e-12, 100e-9).unwrap();
    let mut g = c.benchmark_group("cross_correlate");
    g.sample_size(10);
    for n in [100_000usize, 1_000_000] {
        let a = random_stream(0, n, 25_000, 1);
        let b = random_stream(1, n, 25_000, 2);
        g.throughput(Throughput::Elements(2 * n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| cross_correlate(&a, &b, &grid).unwrap())
        });
    }
    g.finish();

    let a = random_stream(0, 1_000_000, 25_000, 3);
    c.bench_function("autocorrelate/1000000", |bch| {
        bch.iter(|| autocorrelate(&a, &grid).unwrap())
    });
}

fn lifetime(c: &mut Criterion) {
    let grid = HistogramGrid::new(10, 0, 400).unwrap();
    let a = random_stream(0, 200_000, 12_500, 4);
    let b = random_stream(1, 200_000, 12_500, 5);
    let h = cross_correlate(&a, &b, &grid).unwrap();
    c.bench_function("fit_lifetime", |bch| bch.iter(|| fit_lifetime(&h)));
}

criterion_group!(benches, correlate, lifetime);
criterion_main!(benches);
