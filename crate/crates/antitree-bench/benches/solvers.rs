use std::hint::black_box;

use antitree_bench::{doubling, polynomial, profile, small_tree};
use antitree_core::criteria::classify;
use antitree_core::graph_oracle::{build_mesh, oracle_count, oracle_eigenvalues, OracleSolver, Truncation};
use antitree_core::spectra::{bridge_lowest, decomposed_spectrum, sym_eigenvalues, BoundaryCondition};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn symmetric_block(c: &mut Criterion) {
    let mut g = c.benchmark_group("sym_eigenvalues");
    for depth in [10, 30, 100] {
        let p = profile(&doubling(), depth.min(60));
        g.bench_with_input(BenchmarkId::new("doubling_k20", depth.min(60)), &p, |b, p| {
            b.iter(|| sym_eigenvalues(black_box(p), BoundaryCondition::Dirichlet, 20).unwrap())
        });
        let p = profile(&polynomial(1, 2.0), depth);
        g.bench_with_input(BenchmarkId::new("poly_q1_s2_k20", depth), &p, |b, p| {
            b.iter(|| sym_eigenvalues(black_box(p), BoundaryCondition::Dirichlet, 20).unwrap())
        });
    }
    g.finish();
}

fn bridge(c: &mut Criterion) {
    c.bench_function("bridge_lowest_k50", |b| {
        b.iter(|| bridge_lowest(black_box(7), 11, 0.3, 1.7, 50).unwrap())
    });
}

fn decomposition(c: &mut Criterion) {
    let p = profile(&polynomial(1, 4.0), 60);
    c.bench_function("decomposed_spectrum_q1_s4_1e4", |b| {
        b.iter(|| decomposed_spectrum(black_box(&p), BoundaryCondition::Dirichlet, 1e4).unwrap())
    });
}

fn reference(c: &mut Criterion) {
    let p = small_tree();
    let mesh = build_mesh(&p, 1.0 / 200.0, Truncation::Dirichlet).unwrap();
    let mut g = c.benchmark_group("graph_reference");
    g.sample_size(10);
    g.bench_function("count_small_tree", |b| {
        b.iter(|| oracle_count(black_box(&mesh), 50.0).unwrap())
    });
    g.bench_function("condensed_10", |b| {
        b.iter(|| oracle_eigenvalues(black_box(&mesh), 10, OracleSolver::Condensed).unwrap())
    });
    g.finish();
}

fn diagnostics(c: &mut Criterion) {
    let spec = polynomial(2, 3.0);
    c.bench_function("classify_q2_s3_depth200", |b| {
        b.iter(|| classify(black_box(&spec), 200).unwrap())
    });
}

criterion_group!(benches, symmetric_block, bridge, decomposition, reference, diagnostics);
criterion_main!(benches);
