use std::hint::black_box;

use bhg_core::bounds::{b3_refined_constant, thm11_constant, B3Params};
use bhg_core::psi::{psi_lower_bound, theorem32_family};
use bhg_core::sets::{greedy_bhg, max_bhg_exact, rep_profile, DEFAULT_NODE_BUDGET};
use bhg_core::trigcert::{certified_min, partition, CosinePoly};
use criterion::{criterion_group, criterion_main, Criterion};

fn certification(c: &mut Criterion) {
    let h = CosinePoly::new(vec![1.6, 0.0, -0.3, 0.0, 0.0, 0.1]).unwrap();
    let cells = partition(128, 3).unwrap();
    c.bench_function("certified_min weight cell 35 of 128", |b| {
        b.iter(|| certified_min(black_box(&h), cells[34], 1e-8).unwrap())
    });
    c.bench_function("psi five weights m=12", |b| {
        let fam = theorem32_family();
        b.iter(|| psi_lower_bound(black_box(&fam), 12, 1e-8).unwrap())
    });
}

fn constants(c: &mut Criterion) {
    c.bench_function("thm11 constant h=7", |b| b.iter(|| thm11_constant(black_box(7), 1e-12).unwrap()));
    let mut g = c.benchmark_group("refinement");
    g.sample_size(10);
    g.bench_function("b3 refined constant", |b| {
        b.iter(|| b3_refined_constant(black_box(&B3Params::default())).unwrap())
    });
    g.finish();
}

fn sets(c: &mut Criterion) {
    let a = greedy_bhg(2000, 3, 1).unwrap();
    c.bench_function("rep_profile greedy B_3 up to 2000", |b| b.iter(|| rep_profile(black_box(&a), 3).unwrap()));
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("exact Sidon N=40", |b| {
        b.iter(|| max_bhg_exact(black_box(40), 2, 1, DEFAULT_NODE_BUDGET).unwrap())
    });
    g.bench_function("exact B_3[2] N=40", |b| {
        b.iter(|| max_bhg_exact(black_box(40), 3, 2, DEFAULT_NODE_BUDGET).unwrap())
    });
    g.finish();
}

criterion_group!(benches, certification, constants, sets);
criterion_main!(benches);
