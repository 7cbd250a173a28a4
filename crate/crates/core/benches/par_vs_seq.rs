//! Batched-vs-sequential timing on the two hot paths: linearity trial
//! batches and parameter-sweep rows. `map_indexed` is data-parallel under
//! the default `parallel` feature, so building without default features
//! turns this into a sequential-vs-sequential sanity run.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qmlab_core::analysis::Opf;
use qmlab_core::batch;
use qmlab_core::measurement::computational_basis_povm;
use qmlab_core::sample;
use qmlab_core::sequential::{second_stage_marginal, TwoStageExperiment};
use qmlab_core::state::{bloch_to_density, BlochVector};
use qmlab_core::update::UpdateRule;

const SEED: u64 = 99;

fn logistic_experiment(lambda: f64) -> TwoStageExperiment {
    TwoStageExperiment::new(
        computational_basis_povm(),
        computational_basis_povm(),
        UpdateRule::logistic_bloch(lambda).unwrap(),
    )
    .unwrap()
}

fn linearity_gap(f: &Opf, i: usize) -> f64 {
    let e = sample::random_ensemble(&mut sample::rng(SEED, i as u64));
    let mixed = f.evaluate(&e.mix()).unwrap();
    let averaged: f64 = e
        .members()
        .iter()
        .map(|(w, s)| w * f.evaluate(s).unwrap())
        .sum();
    (mixed - averaged).abs()
}

fn bench_linearity_trials(c: &mut Criterion) {
    let f = Opf::second_stage_marginal(logistic_experiment(4.0), "z+");
    let trials = 512;
    let mut group = c.benchmark_group("linearity_trials");
    group.bench_function("batched", |b| {
        b.iter(|| black_box(batch::map_indexed(trials, |i| linearity_gap(&f, i))))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(batch::map_indexed_seq(trials, |i| linearity_gap(&f, i))))
    });
    group.finish();
}

fn sweep_row(lambda_index: usize) -> f64 {
    let lambda = lambda_index as f64 * 4.0 / 160.0;
    let x = logistic_experiment(lambda);
    let rho = bloch_to_density(&BlochVector::new(0.0, 0.0, 0.5).unwrap());
    second_stage_marginal(&x, &rho)
        .unwrap()
        .probability("z+")
        .unwrap()
}

fn bench_sweep_rows(c: &mut Criterion) {
    let rows = 161;
    let mut group = c.benchmark_group("sweep_rows");
    group.bench_function("batched", |b| {
        b.iter(|| black_box(batch::map_indexed(rows, sweep_row)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(batch::map_indexed_seq(rows, sweep_row)))
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_linearity_trials, bench_sweep_rows
}
criterion_main!(benches);
