use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use knn_lab_bench::square_pointset;
use knn_lab_core::graph::component_labels;
use knn_lab_core::harness::{run_experiment, ExperimentConfig};
use knn_lab_core::model::{brute_force_knn_graph, build_knn_graph};

fn knn_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("knn_graph");
    for n in [500.0, 2000.0] {
        let ps = square_pointset(n, 1);
        group.bench_with_input(BenchmarkId::new("indexed", n), &ps, |b, ps| {
            b.iter(|| build_knn_graph(black_box(ps), 5))
        });
        group.bench_with_input(BenchmarkId::new("brute_force", n), &ps, |b, ps| {
            b.iter(|| brute_force_knn_graph(black_box(ps), 5).unwrap())
        });
    }
    let big = square_pointset(1e5, 2);
    group.sample_size(10);
    group.bench_function("indexed/100000", |b| {
        b.iter(|| build_knn_graph(black_box(&big), 5))
    });
    group.finish();
}

fn components(c: &mut Criterion) {
    let ps = square_pointset(1e4, 3);
    let graph = build_knn_graph(&ps, 4);
    c.bench_function("components/10000", |b| {
        b.iter(|| component_labels(black_box(&graph)))
    });
}

fn one_trial(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    group.sample_size(10);
    for grid in [0, 8] {
        let mut cfg = ExperimentConfig::new(1e4, vec![4], 1, 7);
        cfg.grid_sample_count = grid;
        group.bench_with_input(
            BenchmarkId::new("global_n10000_grid", grid),
            &cfg,
            |b, cfg| b.iter(|| run_experiment(black_box(cfg)).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, knn_construction, components, one_trial);
criterion_main!(benches);
