use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use genie_mac_bench::{colored_instance, degraded_channel, general_gains};
use genie_mac_core::{
    optimize_fstar, sic_sum_rate, whiten, Certificate, OptimizerConfig,
};

fn bench_certificate(c: &mut Criterion) {
    let mut group = c.benchmark_group("certificate");
    for k in [2, 4, 8] {
        let dc = degraded_channel(k);
        group.bench_with_input(BenchmarkId::new("build", k), &dc, |b, dc| {
            b.iter(|| Certificate::build(dc).unwrap())
        });
        let cert = Certificate::build(&dc).unwrap();
        group.bench_with_input(BenchmarkId::new("verify", k), &dc, |b, dc| {
            b.iter(|| cert.verify(dc, 1e-9))
        });
    }
    group.finish();
}

fn bench_rates(c: &mut Criterion) {
    let mut group = c.benchmark_group("sic");
    for k in [4, 8] {
        let dc = degraded_channel(k);
        group.bench_with_input(BenchmarkId::new("sum_rate", k), &dc, |b, dc| {
            b.iter(|| sic_sum_rate(dc).sum)
        });
    }
    group.finish();
}

fn bench_genie(c: &mut Criterion) {
    let mut group = c.benchmark_group("genie");
    for k in [4, 8] {
        let gm = colored_instance(k);
        group.bench_with_input(BenchmarkId::new("mac_sum_capacity", k), &gm, |b, gm| {
            b.iter(|| gm.mac_sum_capacity(1.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("whiten", k), &gm, |b, gm| {
            b.iter(|| whiten(gm).unwrap())
        });
    }
    group.finish();
}

fn bench_optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimizer");
    // One full multi-start solve is tens of milliseconds; keep samples low.
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    let cfg = OptimizerConfig {
        starts: 4,
        max_iters: 400,
        ..OptimizerConfig::default()
    };
    for k in [2, 3] {
        let h = general_gains(k);
        group.bench_with_input(BenchmarkId::new("fstar", k), &h, |b, h| {
            b.iter(|| optimize_fstar(h, 1.0, 1.0, &cfg).unwrap().value_bits)
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_certificate,
    bench_rates,
    bench_genie,
    bench_optimizer
);
criterion_main!(benches);
