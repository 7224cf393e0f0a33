use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use orbitlab_bench::{square_half, successor};
use orbitlab_core::check::{check_condition, tightest_constant, Measure};
use orbitlab_core::search::{search_separation, SeparationQuery};
use orbitlab_core::{ConditionSpec, Family};

fn pointwise(c: &mut Criterion) {
    let (space, map, pairs) = square_half(201);
    let spec = ConditionSpec::banach(0.99).unwrap();
    c.bench_function("banach check, 201-point grid", |b| {
        b.iter(|| check_condition(black_box(&spec), &space, &map, &pairs).unwrap())
    });
    c.bench_function("ciric tightest, 201-point grid", |b| {
        b.iter(|| tightest_constant(black_box(&Measure::Ciric), &space, &map, &pairs).unwrap())
    });
}

fn path_averaged(c: &mut Criterion) {
    let (space, map, pairs) = successor(10_000, 500);
    let spec = ConditionSpec::pa(0.99, 2, 500).unwrap();
    c.bench_function("PA check, successor n <= 500, H = 500", |b| {
        b.iter(|| check_condition(black_box(&spec), &space, &map, &pairs).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let q = SeparationQuery::new(vec![Family::Pa], vec![Family::Banach], 200, 7).unwrap();
    c.bench_function("separation search, 200 trials", |b| b.iter(|| search_separation(black_box(&q)).unwrap()));
}

criterion_group!(benches, pointwise, path_averaged, search);
criterion_main!(benches);
