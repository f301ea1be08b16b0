use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psd_langevin::energy::VonNeumann;
use psd_langevin::geometry::PsdPoint;
use psd_langevin::sampler::{
    run_ensemble, run_ensemble_sequential, ChainConfig, EmbeddedState, Observable, SchemeBw, SchemeE,
};

const CHAINS: u64 = 8;
const ITERS: u64 = 5_000;

fn configs() -> Vec<ChainConfig> {
    (0..CHAINS).map(|s| ChainConfig::new(0.001, 0.5, ITERS, s)).collect()
}

fn ensemble(c: &mut Criterion) {
    let configs = configs();
    let obs = [Observable::frobenius_norm()];
    let x0 = PsdPoint::from_diagonal(&[1.0, 1.0, 1.0], 5).unwrap();
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);

    group.bench_function(BenchmarkId::new("E", "parallel"), |b| {
        b.iter(|| {
            run_ensemble(
                &SchemeE,
                &configs,
                |_| EmbeddedState::new(x0.clone()),
                &VonNeumann,
                &obs,
            )
            .unwrap()
        })
    });
    group.bench_function(BenchmarkId::new("E", "sequential"), |b| {
        b.iter(|| {
            run_ensemble_sequential(
                &SchemeE,
                &configs,
                |_| EmbeddedState::new(x0.clone()),
                &VonNeumann,
                &obs,
            )
            .unwrap()
        })
    });
    group.bench_function(BenchmarkId::new("BW", "parallel"), |b| {
        b.iter(|| run_ensemble(&SchemeBw, &configs, |_| x0.to_factor(), &VonNeumann, &obs).unwrap())
    });
    group.bench_function(BenchmarkId::new("BW", "sequential"), |b| {
        b.iter(|| run_ensemble_sequential(&SchemeBw, &configs, |_| x0.to_factor(), &VonNeumann, &obs).unwrap())
    });
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
