use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use landau_core::hermite::omega_all;
use landau_core::{
    assemble, dense_spectrum, reduce, Fourier1, Fourier2, GaugeData, MatrixElementTable, ReductionOptions,
    TableOptions,
};

const GOLDEN: f64 = 1.618_033_988_749_895;

fn mixed() -> GaugeData {
    let a1 = Fourier2::product(&Fourier1::cos(1, 1.0), &Fourier1::cos(1, 1.0));
    GaugeData::new(2.0 * PI * GOLDEN, 1e-2, 1e-3, Fourier1::cos(1, 1.0), a1).unwrap()
}

fn hermite(c: &mut Criterion) {
    c.bench_function("omega_all 0..=40", |b| b.iter(|| omega_all(40, black_box(1.3))));
}

fn table(c: &mut Criterion) {
    let g = mixed();
    c.bench_function("table build l_max 12", |b| {
        b.iter(|| MatrixElementTable::build(black_box(&g), &TableOptions::new(12)).unwrap())
    });
}

fn fiber(c: &mut Criterion) {
    let g = mixed();
    let t = MatrixElementTable::build(&g, &TableOptions::new(12)).unwrap();
    let mut group = c.benchmark_group("fiber m_max 12 N 16");
    group.sample_size(10);
    group.bench_function("assemble", |b| b.iter(|| assemble(black_box(0.3), &g, &t, 12, 16).unwrap()));
    let op = assemble(0.3, &g, &t, 12, 16).unwrap();
    group.bench_function("dense spectrum", |b| b.iter(|| dense_spectrum(black_box(&op)).unwrap()));
    group.bench_function("reduce", |b| {
        b.iter(|| reduce(black_box(&op), &ReductionOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, hermite, table, fiber);
criterion_main!(benches);
