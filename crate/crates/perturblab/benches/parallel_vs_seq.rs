//! Compares the parallel exact optimizer against the sequential fallback on
//! growing instance sizes, and times a linkage run for scale.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use perturblab::linkage::linkage_run;
use perturblab::matrix::DissimMatrix;
use perturblab::objectives::{exact_optimize_capped, exact_optimize_seq, Objective};
use perturblab::LinkageMethod;

fn instance(n: usize) -> DissimMatrix {
    DissimMatrix::from_fn(n, |i, j| ((i * 7 + j * 13) % 23 + 1) as f64).unwrap()
}

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_optimize");
    for n in [8usize, 10, 12] {
        let d = instance(n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &d, |b, d| {
            b.iter(|| exact_optimize_capped(Objective::KMeans, d, 3, n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &d, |b, d| {
            b.iter(|| exact_optimize_seq(Objective::KMeans, d, 3, n).unwrap())
        });
    }
    group.finish();
}

fn bench_linkage(c: &mut Criterion) {
    let d = instance(200);
    c.bench_function("linkage_average_n200_k5", |b| {
        b.iter(|| linkage_run(LinkageMethod::Average, &d, 5).unwrap())
    });
}

criterion_group!(benches, bench_exact, bench_linkage);
criterion_main!(benches);
