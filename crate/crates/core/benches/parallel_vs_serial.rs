//! Data-parallel inner loops benched against their sequential execution.
//!
//! With the default `parallel` feature the same code runs in a 1-worker and
//! an all-core rayon pool; outputs are identical by construction, only the
//! wall time differs. Building the bench with `--no-default-features`
//! exercises the compile-time sequential fallback instead.

use criterion::{criterion_group, criterion_main, Criterion};

use radarkit_core::identification::{benchmark_model, crb_gain, mle_gain, GainGrid, LikelihoodMode};
use radarkit_core::interference::{
    chance_probability, real_channel_1x2, real_probe_1x2, ChanceSpec, ProbeLag, ProbePlan,
};
use radarkit_core::inverse_tracker::inverse_particle_filter;
use radarkit_core::statespace::simulate_engagement;

#[cfg(feature = "parallel")]
fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let build = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    vec![("serial", build(1)), ("parallel", build(0))]
}

fn bench_particle_filter(c: &mut Criterion) {
    let (model, map) = benchmark_model(2.0);
    let trace = simulate_engagement(&model, &map, 100, 7).unwrap();
    let mut group = c.benchmark_group("particle_filter_2000x100");
    group.sample_size(20);

    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| inverse_particle_filter(&model, &map, &trace, 2000, 3).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| inverse_particle_filter(&model, &map, &trace, 2000, 3).unwrap())
    });
    group.finish();
}

fn bench_crb_ensemble(c: &mut Criterion) {
    let (model, map) = benchmark_model(2.0);
    let mut group = c.benchmark_group("crb_ensemble_100x100");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| {
                pool.install(|| crb_gain(&model, &map, LikelihoodMode::Inverse, 100, 100, 5).unwrap())
            })
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| crb_gain(&model, &map, LikelihoodMode::Inverse, 100, 100, 5).unwrap())
    });
    group.finish();
}

fn bench_chance_probability(c: &mut Criterion) {
    let channel = real_channel_1x2([7.0, 7.0], [1.0, 1.0], 1.0, 0.1).unwrap();
    let plan =
        ProbePlan::new(vec![real_probe_1x2([0.2, 0.5], 8.0)], ProbeLag::Simultaneous).unwrap();
    let spec = ChanceSpec::new(3.0, 0.2, 20_000, 11).unwrap();
    let mut group = c.benchmark_group("chance_probability_20k");
    group.sample_size(20);

    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| chance_probability(&channel, &plan, &spec, 0).unwrap()))
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| chance_probability(&channel, &plan, &spec, 0).unwrap())
    });
    group.finish();
}

fn bench_likelihood_grid(c: &mut Criterion) {
    let (model, map) = benchmark_model(2.5);
    let trace = simulate_engagement(&model, &map, 200, 13).unwrap();
    let grid = GainGrid { lo: 0.5, hi: 6.0, count: 128 };
    let mut group = c.benchmark_group("mle_grid_128x200");
    group.sample_size(10);

    #[cfg(feature = "parallel")]
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| {
                pool.install(|| {
                    mle_gain(&model, &map, &trace, LikelihoodMode::Inverse, grid, 1e-3).unwrap()
                })
            })
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential_fallback", |b| {
        b.iter(|| mle_gain(&model, &map, &trace, LikelihoodMode::Inverse, grid, 1e-3).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_particle_filter,
    bench_crb_ensemble,
    bench_chance_probability,
    bench_likelihood_grid
);
criterion_main!(benches);
