//! End-to-end costs users actually pay: simulating replicas, the
//! time-change residual transform, and a single maximum-likelihood fit.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use newshawk_bench::{de_news_spec, pl_news_spec, stream_of_size};
use newshawk_core::diagnostics::residuals;
use newshawk_core::estimation::{fit, FitConfig, ModelVariant};
use newshawk_core::simulation::{simulate, SimConfig};

fn simulate_throughput(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    for (name, spec) in [("de", de_news_spec()), ("pl", pl_news_spec())] {
        // Expected events over the window: (mu + mass_news/3600) / (1 - n) * T.
        let horizon = 36_000.0;
        let news = newshawk_core::model::NewsTimes::new(
            (0..10).map(|k| 1800.0 + 3600.0 * k as f64).collect(),
        )
        .unwrap();
        let config = SimConfig {
            news,
            ..SimConfig::new(0.0, horizon, 1, 11)
        };
        let n_out = simulate(&spec, &config).unwrap()[0].times().len();
        group.throughput(Throughput::Elements(n_out as u64));
        group.bench_function(BenchmarkId::new(name, n_out), |b| {
            b.iter(|| simulate(&spec, &config).unwrap())
        });
    }
    group.finish();
}

fn residual_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("residuals");
    let spec = de_news_spec();
    for &n in &[1_000usize, 10_000] {
        let (events, news) = stream_of_size(&spec, n, 3);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("de", n), &n, |b, _| {
            b.iter(|| residuals(&spec, &events, &news).unwrap())
        });
    }
    group.finish();
}

fn single_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    let spec = de_news_spec();
    let (events, news) = stream_of_size(&spec, 500, 19);
    let config = FitConfig {
        n_starts: 1,
        ..FitConfig::default()
    };
    for variant in [ModelVariant::DoubleExp, ModelVariant::DoubleExpNews] {
        group.bench_function(BenchmarkId::new(variant.to_string(), 500), |b| {
            b.iter(|| fit(variant, &events, &news, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulate_throughput, residual_transform, single_fit);
criterion_main!(benches);
