//! Throughput of the shot-shaped hot paths: the library batch API (rayon
//! data-parallel when the default `parallel` feature is on) against an
//! explicit single-shot loop over the same derived streams. Both produce
//! identical numbers; the comparison isolates the parallel speedup.
//!
//! Rebuild with `--no-default-features` to benchmark the sequential library
//! path itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bell_shadows_core::moments::{ensemble_moment, Ensemble, MomentMode};
use bell_shadows_core::observables::Observable;
use bell_shadows_core::rng::RngStream;
use bell_shadows_core::shadows::{generate_snapshot, shadow_estimates, StateSource};
use bell_shadows_core::states::{DensityMatrix, PureState};

fn label(path: &str) -> String {
    let mode = if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    };
    format!("{path}({mode})")
}

fn bench_snapshot_batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("shadow_estimates_n3");
    group.sample_size(10);
    let mut rng = RngStream::from_seed(1);
    let rho = DensityMatrix::random_mixed(3, &mut rng);
    let source = StateSource::from_density(rho).unwrap();
    let ensemble = Ensemble::stabilizer(3);
    let o = Observable::pauli("ZZZ").unwrap();
    let shots = 20_000u64;
    let base = RngStream::from_seed(7);

    group.bench_function(BenchmarkId::new(label("batch"), shots), |b| {
        b.iter(|| shadow_estimates(&source, &ensemble, &o, shots, &base).unwrap())
    });
    group.bench_function(BenchmarkId::new("single_shot_loop", shots), |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..shots {
                let mut stream = base.substream(i);
                let snap = generate_snapshot(&source, &ensemble, &mut stream, i).unwrap();
                acc += o.shadow_estimate(&snap).unwrap();
            }
            acc
        })
    });
    group.finish();
}

fn bench_mc_moment(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_moment_n2_t2");
    group.sample_size(10);
    let ensemble = Ensemble::haar(2);
    let base = RngStream::from_seed(3);
    let samples = 5_000u64;

    group.bench_function(BenchmarkId::new(label("batch"), samples), |b| {
        b.iter(|| {
            ensemble_moment(&ensemble, 2, MomentMode::MonteCarlo { samples }, &base).unwrap()
        })
    });
    group.finish();
}

fn bench_estimator_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_pipeline_n2");
    group.sample_size(10);
    let source = StateSource::from_pure(PureState::plus(2));
    let ensemble = Ensemble::stabilizer(2);
    let o = Observable::pauli("XX").unwrap();
    let base = RngStream::from_seed(11);
    let shots = 30_000u64;

    group.bench_function(BenchmarkId::new(label("shots"), shots), |b| {
        b.iter(|| shadow_estimates(&source, &ensemble, &o, shots, &base).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_snapshot_batches,
    bench_mc_moment,
    bench_estimator_pipeline
);
criterion_main!(benches);
