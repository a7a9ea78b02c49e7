use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qsynth_bench::selection_fixture;
use qsynth_core::query::{ig_lookahead, QbcStrategy, ResponseMatrix};

fn selection(c: &mut Criterion) {
    let (domain, programs, inputs) = selection_fixture(129, 100);
    let refs: Vec<_> = programs.iter().collect();
    let keys: Vec<usize> = (0..inputs.len()).collect();
    let all: Vec<usize> = (0..refs.len()).collect();
    c.bench_function("ig/build_matrix/129x100", |b| {
        b.iter(|| black_box(ResponseMatrix::build(&domain, &refs, &inputs)))
    });
    let m = ResponseMatrix::build(&domain, &refs, &inputs);
    c.bench_function("ig/greedy/129x100", |b| b.iter(|| black_box(ig_lookahead(&m, &all, &keys, 1))));
    let small: Vec<usize> = (0..32).collect();
    let keys20: Vec<usize> = (0..20).collect();
    let m20 = ResponseMatrix::build(&domain, &refs[..32], &inputs[..20]);
    c.bench_function("ig/lookahead2/32x20", |b| b.iter(|| black_box(ig_lookahead(&m20, &small, &keys20, 2))));
    c.bench_function("qbc/scores/32x100", |b| {
        b.iter(|| black_box(QbcStrategy::scores(&domain, &refs[..32], &inputs)))
    });
}

criterion_group!(benches, selection);
criterion_main!(benches);
