use std::hint::black_box;

use cascade_lcr::{
    cascade_trace, estimate_lcr_afd, exact_lcr, laplace_lcr, product_exp_cdf, CascadeSpec,
    CdfEvalOptions, QuadratureSpec, ThresholdGrid, TraceSpec,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn unit(n: usize) -> CascadeSpec {
    CascadeSpec::unity_gain(&vec![1.0; n], &vec![10.0; n]).unwrap()
}

fn analytic(c: &mut Criterion) {
    let five = unit(5);
    c.bench_function("laplace_lcr N=5", |b| b.iter(|| laplace_lcr(&five, black_box(0.3))));
    let opts = CdfEvalOptions::default();
    let mut g = c.benchmark_group("product_exp_cdf");
    for n in [2usize, 3, 5] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| product_exp_cdf(black_box(0.05), n, &opts))
        });
    }
    g.finish();
}

fn exact(c: &mut Criterion) {
    let q = QuadratureSpec::default();
    let mut g = c.benchmark_group("exact_lcr");
    g.sample_size(10);
    for n in [2usize, 3] {
        let cascade = unit(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &cascade, |b, cascade| {
            b.iter(|| exact_lcr(cascade, black_box(0.1), &q))
        });
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let cascade = unit(3);
    let spec = TraceSpec::for_cascade(&cascade, 20.0, 1);
    let grid = ThresholdGrid::from_db(-30.0, 10.0, 0.5, 1.0).unwrap();
    let mut g = c.benchmark_group("simulator");
    g.sample_size(10);
    g.bench_function("cascade_trace N=3, 20 s", |b| b.iter(|| cascade_trace(&cascade, &spec)));
    let trace = cascade_trace(&cascade, &spec).unwrap();
    g.bench_function("estimate_lcr_afd 81 thresholds", |b| {
        b.iter(|| estimate_lcr_afd(black_box(&trace), &grid))
    });
    g.finish();
}

criterion_group!(benches, analytic, exact, simulation);
criterion_main!(benches);
