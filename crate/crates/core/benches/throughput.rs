//! Throughput of the data-parallel hot paths, comparing the rayon pool
//! against single-threaded execution.
//!
//! With the default `parallel` feature the "threads-N" series uses the full
//! pool and "threads-1" pins rayon to one worker, so one run shows the fanout
//! gain. Building the bench with `--no-default-features` exercises the plain
//! sequential fallback; criterion baselines make the two builds comparable:
//!
//! ```text
//! cargo bench -p xaieval-core -- --save-baseline parallel
//! cargo bench -p xaieval-core --no-default-features -- --save-baseline sequential
//! ```

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use xaieval_core::bench::{run_benchmark, DatasetSpec, RunConfig};
use xaieval_core::exec;
use xaieval_core::matrix::Matrix;
use xaieval_core::models::{train_forest, tune, ForestParams, ModelFamily};
use xaieval_core::rng;
use xaieval_core::synth::{write_csv, SynthSpec};

fn mode_label() -> String {
    if exec::is_parallel() {
        format!("threads-{}", rayon_thread_count())
    } else {
        "sequential".to_string()
    }
}

#[cfg(feature = "parallel")]
fn rayon_thread_count() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn rayon_thread_count() -> usize {
    1
}

#[cfg(feature = "parallel")]
fn in_single_thread_pool<T>(f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(f)
}

fn training_data(n: usize, d: usize) -> (Matrix, Vec<usize>) {
    use rand::Rng;
    let mut stream = rng::stream(rng::derive(1, &[rng::hash_str("bench-data")]));
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| stream.random_range(-2.0..2.0)).collect()).collect();
    let labels: Vec<usize> =
        rows.iter().map(|r| usize::from(r.iter().sum::<f64>() > 0.0)).collect();
    (Matrix::from_rows(rows), labels)
}

fn bench_forest_training(c: &mut Criterion) {
    let (x, y) = training_data(240, 12);
    let params = ForestParams { n_trees: 60, ..ForestParams::default() };
    let mut group = c.benchmark_group("forest_training");
    group.sample_size(20);
    group.bench_function(mode_label(), |b| {
        b.iter(|| black_box(train_forest(&x, &y, &params, 7).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("threads-1", |b| {
        b.iter(|| in_single_thread_pool(|| black_box(train_forest(&x, &y, &params, 7).unwrap())))
    });
    group.finish();
}

fn bench_tuning(c: &mut Criterion) {
    let (x, y) = training_data(160, 8);
    let mut group = c.benchmark_group("random_search_tuning");
    group.sample_size(10);
    group.bench_function(mode_label(), |b| {
        b.iter(|| black_box(tune(ModelFamily::Forest, &x, &y, 8, 3).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("threads-1", |b| {
        b.iter(|| {
            in_single_thread_pool(|| black_box(tune(ModelFamily::Forest, &x, &y, 8, 3).unwrap()))
        })
    });
    group.finish();
}

fn desk_config(dir: &std::path::Path) -> RunConfig {
    let path = dir.join("bench.csv");
    write_csv(&SynthSpec::new(80, 6, 2, 9).with_noise(1.0), &path).unwrap();
    let mut config = RunConfig::new(
        vec![DatasetSpec { id: "bench".into(), path, target: "label".into() }],
        13,
    );
    config.per_class_samples = 2;
    config.tuning_trials = 2;
    config.explain.n_samples = 30;
    config.metrics.n_perturb = 3;
    config.sensitivity_inner_samples = Some(15);
    config
}

fn bench_pipeline(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let config = desk_config(dir.path());
    let mut group = c.benchmark_group("benchmark_pipeline");
    group.sample_size(10);
    group.bench_function(mode_label(), |b| {
        b.iter(|| black_box(run_benchmark(&config).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("threads-1", |b| {
        b.iter(|| in_single_thread_pool(|| black_box(run_benchmark(&config).unwrap())))
    });
    group.finish();
}

criterion_group!(benches, bench_forest_training, bench_tuning, bench_pipeline);
criterion_main!(benches);
