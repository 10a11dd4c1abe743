use std::f64::consts::PI;

use proptest::prelude::*;
use sea_core::defaults::sea_23_23_plant;
use sea_core::plant::{friction_force, step};
use sea_core::{LoadModel, PlantParams, SimState, Waveform};

const DT: f64 = 1e-4;

fn at_rest_with_deflection(d: f64) -> SimState {
    SimState {
        x_m: d,
        ..SimState::default()
    }
}

fn run(p: &PlantParams, load: &LoadModel, s0: SimState, effort: f64, steps: usize) -> Vec<SimState> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s0);
    for _ in 0..steps {
        let next = step(p, out.last().unwrap(), effort, load, DT).unwrap();
        out.push(next);
    }
    out
}

fn total_energy(p: &PlantParams, load_mass: f64, s: &SimState) -> f64 {
    0.5 * p.motor_mass * s.v_m * s.v_m + 0.5 * load_mass * s.v_l * s.v_l + 0.5 * p.spring_stiffness * s.deflection().powi(2)
}

/// Oscillation frequency from the mean spacing of upward zero crossings,
/// with linear interpolation between samples.
fn crossing_frequency(signal: &[f64]) -> f64 {
    let mut crossings = Vec::new();
    for i in 1..signal.len() {
        if signal[i - 1] < 0.0 && signal[i] >= 0.0 {
            let frac = -signal[i - 1] / (signal[i] - signal[i - 1]);
            crossings.push((i as f64 - 1.0 + frac) * DT);
        }
    }
    let n = crossings.len() - 1;
    n as f64 / (crossings[n] - crossings[0])
}

#[test]
fn locked_oscillation_frequency_matches_closed_form() {
    let p = sea_23_23_plant().frictionless();
    let traj = run(&p, &LoadModel::Locked, at_rest_with_deflection(1e-3), 0.0, 50_000);
    let measured = crossing_frequency(&traj.iter().map(|s| s.x_m).collect::<Vec<_>>());
    let expected = (p.spring_stiffness / p.motor_mass).sqrt() / (2.0 * PI);
    assert!((measured / expected - 1.0).abs() < 0.005, "{measured} vs {expected}");
}

#[test]
fn unforced_two_mass_energy_drift_is_small() {
    let p = sea_23_23_plant().frictionless();
    for load in [
        LoadModel::Locked,
        LoadModel::InertialLoad {
            load_mass: 20.0,
            external_force: Waveform::Zero,
        },
    ] {
        let m_l = match load {
            LoadModel::InertialLoad { load_mass, .. } => load_mass,
            _ => 0.0,
        };
        let traj = run(&p, &load, at_rest_with_deflection(2e-3), 0.0, 100_000);
        let e0 = total_energy(&p, m_l, &traj[0]);
        let worst = traj
            .iter()
            .map(|s| (total_energy(&p, m_l, s) - e0).abs() / e0)
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{load:?}: drift {worst}");
    }
}

#[test]
fn stick_holds_motor_exactly() {
    let p = sea_23_23_plant();
    // Spring force on the motor below breakaway: K·d < coulomb.
    let d = 0.5 * p.motor_coulomb / p.spring_stiffness;
    let traj = run(&p, &LoadModel::Locked, at_rest_with_deflection(d), 0.0, 1000);
    for s in &traj[1..] {
        assert!(s.stuck);
        assert_eq!(s.x_m, d);
        assert_eq!(s.v_m, 0.0);
    }
}

#[test]
fn identical_inputs_give_bit_identical_states() {
    let p = sea_23_23_plant();
    let load = LoadModel::InertialLoad {
        load_mass: 3.0,
        external_force: Waveform::sine(50.0, 3.0),
    };
    let a = run(&p, &load, at_rest_with_deflection(1e-4), 200.0, 5000);
    let b = run(&p, &load, at_rest_with_deflection(1e-4), 200.0, 5000);
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn sliding_friction_never_injects_energy(
        v in prop_oneof![-2.0f64..-1e-4, 1e-4f64..2.0],
        applied in -100.0f64..100.0,
    ) {
        let p = sea_23_23_plant();
        let (f, stuck) = friction_force(&p, v, applied);
        prop_assert!(!stuck);
        prop_assert!(f * v <= 0.0);
    }

    #[test]
    fn effort_and_speed_stay_within_limits(
        cmd in -1e5f64..1e5,
        d in -5e-3f64..5e-3,
        load_mass in 0.5f64..50.0,
    ) {
        let p = sea_23_23_plant();
        let load = LoadModel::InertialLoad { load_mass, external_force: Waveform::Zero };
        let mut s = at_rest_with_deflection(d);
        for _ in 0..500 {
            s = step(&p, &s, cmd, &load, DT).unwrap();
            prop_assert!(s.effort.abs() <= p.max_effort_intermittent);
            prop_assert!(s.v_m.abs() <= p.max_speed * (1.0 + 1e-12));
        }
    }

    #[test]
    fn frequency_follows_stiffness_and_mass(k_scale in 0.25f64..4.0, m_scale in 0.25f64..4.0) {
        let base = sea_23_23_plant().frictionless();
        let p = PlantParams {
            spring_stiffness: base.spring_stiffness * k_scale,
            motor_mass: base.motor_mass * m_scale,
            ..base
        };
        let traj = run(&p, &LoadModel::Locked, at_rest_with_deflection(1e-4), 0.0, 30_000);
        let measured = crossing_frequency(&traj.iter().map(|s| s.x_m).collect::<Vec<_>>());
        prop_assert!((measured / p.locked_resonance_hz() - 1.0).abs() < 0.005);
    }
}
