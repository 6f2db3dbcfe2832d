use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sps_core::coherence::analyze_source;
use sps_core::dynamics::{
    calibrate_to_target, evolve, exact_moments, g1_grid, g2_grid, recommended_grid, PropagationOptions, TimeGrid,
};
use sps_core::model::{build_ladder, build_lambda, build_two_level, default_center, PulseEnvelope, SourceSystem};
use sps_core::trajectories::{photocount_distribution, run_trajectories};

fn sources(fwhm: f64) -> [(&'static str, SourceSystem); 3] {
    let pulse = PulseEnvelope::gaussian_with_area(std::f64::consts::PI, default_center(fwhm), fwhm).unwrap();
    [
        ("two_level", build_two_level(0.0, 1.0, pulse.clone()).unwrap()),
        ("ladder", build_ladder(1.0, pulse.clone()).unwrap()),
        ("lambda", build_lambda(0.0, 0.0, 1.0, pulse).unwrap()),
    ]
}

fn bench_evolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for (name, s) in sources(1.0) {
        let g = recommended_grid(&s).unwrap();
        group.bench_function(BenchmarkId::new(name, g.len()), |b| b.iter(|| evolve(black_box(&s), &g).unwrap()));
    }
    group.finish();
}

fn bench_correlations(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlation_grid");
    group.sample_size(10);
    let [(_, s), ..] = sources(1.0);
    for n in [100, 200, 400] {
        let g = TimeGrid::new(0.0, s.default_window_end(), n).unwrap();
        group.bench_with_input(BenchmarkId::new("g1", n), &g, |b, g| b.iter(|| g1_grid(&s, g).unwrap()));
        group.bench_with_input(BenchmarkId::new("g2", n), &g, |b, g| b.iter(|| g2_grid(&s, g).unwrap()));
    }
    group.finish();
}

fn bench_analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    let [(_, s), ..] = sources(0.5);
    let g = recommended_grid(&s).unwrap();
    group.bench_function("analyze_source", |b| b.iter(|| analyze_source(&s, &g).unwrap()));
    group.bench_function("exact_moments", |b| {
        b.iter(|| exact_moments(&s, g.t_end(), PropagationOptions::default()).unwrap())
    });
    group.bench_function("calibrate", |b| b.iter(|| calibrate_to_target(&s, &g, 1.0).unwrap()));
    group.finish();
}

fn bench_trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectories");
    group.sample_size(10);
    for (name, s) in sources(1.0) {
        let g = recommended_grid(&s).unwrap();
        group.bench_function(BenchmarkId::new(name, 10_000), |b| {
            b.iter(|| {
                let records = run_trajectories(&s, &g, 10_000, 1).unwrap();
                photocount_distribution(&records, 1.0, 0).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_evolve, bench_correlations, bench_analysis, bench_trajectories);
criterion_main!(benches);
