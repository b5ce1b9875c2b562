use std::hint::black_box;

use chiral_bench::{block_grid, chain, point};
use chiral_core::{iterate_product, iterate_qdet, qdet_block};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

fn iteration(c: &mut Criterion) {
    let lambda = Complex64::new(0.3, 0.4);
    let x = point();
    let mut group = c.benchmark_group("iterate");
    for k in [1, 2, 4, 8] {
        let ch = chain(k);
        group.bench_with_input(BenchmarkId::new("product", k), &ch, |b, ch| {
            b.iter(|| iterate_product(black_box(ch), lambda, x).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("qdet", k), &ch, |b, ch| {
            b.iter(|| iterate_qdet(black_box(ch), lambda, x).unwrap())
        });
    }
    group.finish();
}

fn quasideterminant(c: &mut Criterion) {
    let mut group = c.benchmark_group("qdet_block");
    for size in [2, 3, 5, 9] {
        let grid = block_grid(size, 2);
        group.bench_with_input(BenchmarkId::from_parameter(size), &grid, |b, g| {
            b.iter(|| qdet_block(black_box(g)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, iteration, quasideterminant);
criterion_main!(benches);
