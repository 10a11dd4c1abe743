use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::Vector3;
use sea_core::{distribute_forces, enumerate_oracle, FootContact, StanceProblem};

fn four_feet() -> StanceProblem {
    let feet = [(0.4, 0.25), (0.4, -0.25), (-0.4, 0.25), (-0.4, -0.25)]
        .iter()
        .map(|&(x, y)| FootContact::flat(x, y, 0.0, 0.6))
        .collect();
    StanceProblem::new(feet, Vector3::new(80.0, -30.0, 900.0), Vector3::new(12.0, -40.0, 6.0))
}

fn stance(c: &mut Criterion) {
    let p = four_feet();
    c.bench_function("stance_distribute_4_feet", |b| b.iter(|| distribute_forces(black_box(&p)).unwrap()));
    c.bench_function("stance_oracle_4_feet", |b| b.iter(|| enumerate_oracle(black_box(&p)).unwrap()));
}

criterion_group!(benches, stance);
criterion_main!(benches);
