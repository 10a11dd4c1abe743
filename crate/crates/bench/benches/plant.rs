use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sea_core::defaults::{sea_23_23_controller, sea_23_23_plant, PLANT_DT};
use sea_core::plant::step;
use sea_core::{run_closed_loop, LoadModel, SimState, Waveform};

fn plant_step(c: &mut Criterion) {
    let p = sea_23_23_plant();
    let load = LoadModel::InertialLoad {
        load_mass: 5.0,
        external_force: Waveform::sine(20.0, 2.0),
    };
    let s = SimState {
        x_m: 1e-3,
        v_m: 0.05,
        ..SimState::default()
    };
    c.bench_function("plant_step_rk4", |b| {
        b.iter(|| step(black_box(&p), black_box(&s), black_box(150.0), &load, PLANT_DT).unwrap())
    });
}

fn closed_loop_second(c: &mut Criterion) {
    let p = sea_23_23_plant();
    let ctrl = sea_23_23_controller();
    c.bench_function("closed_loop_1s_step", |b| {
        b.iter(|| run_closed_loop(&p, &LoadModel::Locked, &ctrl, Waveform::step(444.8), 1.0, PLANT_DT, 0).unwrap())
    });
}

criterion_group!(benches, plant_step, closed_loop_second);
criterion_main!(benches);
