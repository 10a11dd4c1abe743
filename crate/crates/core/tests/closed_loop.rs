//! Closed-loop behaviour of the force controller, cross-checked against the
//! analysis routines with independent computations.

use std::f64::consts::PI;

use sea_core::analysis::{
    bandwidth_from_points, bode_force_tracking, energy_audit, harmonic_episode, log_frequencies, output_impedance,
    BodeOptions, HarmonicEpisode, ImpedanceOptions, SeaSystem,
};
use sea_core::control::TrajectoryRecord;
use sea_core::defaults::{sea_23_23_controller, sea_23_23_plant, PLANT_DT, SMALL_FORCE_FRACTION};
use sea_core::units::NEWTONS_PER_POUND_FORCE;
use sea_core::{find_spec, run_closed_loop, ControllerConfig, LoadModel, Trajectory, Waveform};

const STEP_FORCE: f64 = 100.0 * NEWTONS_PER_POUND_FORCE;

/// Settling time of the 100 lbf step for the shipped SEA-23-23 preset.
const STEP_SETTLING_TIME_GOLDEN: f64 = 0.0525;

fn step_response(cfg: &ControllerConfig, plant_frictionless: bool) -> Trajectory {
    let mut plant = sea_23_23_plant();
    if plant_frictionless {
        plant = plant.frictionless().ideal_sensor();
    }
    run_closed_loop(&plant, &LoadModel::Locked, cfg, Waveform::step(STEP_FORCE), 2.0, PLANT_DT, 0).unwrap()
}

/// Last time the true force was outside `±band` of `target`.
fn settling_time(records: &[TrajectoryRecord], target: f64, band: f64) -> f64 {
    records
        .iter()
        .rev()
        .find(|r| (r.force_true - target).abs() > band * target.abs())
        .map_or(0.0, |r| r.time)
}

/// Fundamental amplitude of `x` at `freq` over whole cycles, by direct
/// quadrature with the trapezoid rule.
fn fundamental(t: &[f64], x: &[f64], freq: f64) -> f64 {
    let w = 2.0 * PI * freq;
    let (mut c, mut s) = (0.0, 0.0);
    for i in 1..t.len() {
        let h = t[i] - t[i - 1];
        c += 0.5 * h * (x[i] * (w * t[i]).cos() + x[i - 1] * (w * t[i - 1]).cos());
        s += 0.5 * h * (x[i] * (w * t[i]).sin() + x[i - 1] * (w * t[i - 1]).sin());
    }
    let span = t[t.len() - 1] - t[0];
    2.0 * (c * c + s * s).sqrt() / span
}

#[test]
fn step_settles_within_two_percent() {
    let traj = step_response(&sea_23_23_controller(), false);
    let tail = &traj.records[traj.len() - 2000..];
    for r in tail {
        assert!((r.force_true - STEP_FORCE).abs() <= 0.02 * STEP_FORCE, "{}", r.force_true);
    }
    let ts = settling_time(&traj.records, STEP_FORCE, 0.02);
    assert!((ts - STEP_SETTLING_TIME_GOLDEN).abs() < 0.5 * PLANT_DT, "settling time {ts}");
}

#[test]
fn one_hertz_sine_agrees_with_bode_point() {
    let amplitude = 44.5;
    let sys = SeaSystem::new(sea_23_23_plant(), sea_23_23_controller());
    let bode = bode_force_tracking(&sys, amplitude, &[1.0], &BodeOptions::default()).unwrap();
    let traj = run_closed_loop(
        &sys.plant,
        &LoadModel::Locked,
        &sys.controller,
        Waveform::sine(amplitude, 1.0),
        6.0,
        PLANT_DT,
        0,
    )
    .unwrap();
    // Skip two cycles of transient, keep four whole cycles.
    let keep: Vec<&TrajectoryRecord> = traj.records.iter().filter(|r| r.time >= 2.0 - 1e-9).collect();
    let t: Vec<f64> = keep.iter().map(|r| r.time).collect();
    let f: Vec<f64> = keep.iter().map(|r| r.force_true).collect();
    let ratio = fundamental(&t, &f, 1.0) / amplitude;
    let rel = (ratio / bode[0].amplitude_ratio - 1.0).abs();
    assert!(rel < 0.01, "simulated {ratio} vs bode {}", bode[0].amplitude_ratio);
}

#[test]
fn larger_gain_gives_smaller_offset_without_feedforward() {
    let base = ControllerConfig {
        feedforward: false,
        ..sea_23_23_controller()
    };
    let mut errors = Vec::new();
    for kp in [2.0, 5.0, 10.0] {
        let cfg = ControllerConfig { kp, ..base };
        let traj = step_response(&cfg, true);
        let err = STEP_FORCE - traj.last().unwrap().force_true;
        let expected = STEP_FORCE / (1.0 + kp);
        assert!((err / expected - 1.0).abs() < 1e-3, "kp {kp}: {err} vs {expected}");
        errors.push(err);
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn feedforward_offset_is_within_one_quantum() {
    let plant = sea_23_23_plant();
    for target in [50.0, STEP_FORCE, 1000.0] {
        let traj = run_closed_loop(
            &plant,
            &LoadModel::Locked,
            &sea_23_23_controller(),
            Waveform::step(target),
            2.0,
            PLANT_DT,
            0,
        )
        .unwrap();
        let err = (traj.last().unwrap().force_true - target).abs();
        assert!(err <= plant.force_quantum(), "target {target}: error {err}");
    }
}

#[test]
fn slow_sine_is_tracked_at_unity() {
    let amplitude = 10.0 * NEWTONS_PER_POUND_FORCE;
    let sys = SeaSystem::new(sea_23_23_plant(), sea_23_23_controller());
    let p = bode_force_tracking(&sys, amplitude, &[0.1], &BodeOptions::default()).unwrap();
    assert!((0.98..=1.02).contains(&p[0].amplitude_ratio), "{}", p[0].amplitude_ratio);
}

#[test]
fn large_force_bandwidth_does_not_exceed_small_force_bandwidth() {
    let sys = SeaSystem::new(sea_23_23_plant(), sea_23_23_controller());
    let freqs = log_frequencies(1.0, 100.0, 25);
    let opts = BodeOptions::default();
    let small_amp = SMALL_FORCE_FRACTION * find_spec("SEA-23-23").unwrap().continuous_force.si();
    let small = bode_force_tracking(&sys, small_amp, &freqs, &opts).unwrap();
    let large = bode_force_tracking(&sys, 300.0 * NEWTONS_PER_POUND_FORCE, &freqs, &opts).unwrap();
    let (s, l) = (bandwidth_from_points(&small).unwrap(), bandwidth_from_points(&large).unwrap());
    assert!(l.frequency <= s.frequency, "large {} small {}", l.frequency, s.frequency);
}

#[test]
fn frictionless_cycle_work_balances() {
    let sys = SeaSystem::new(sea_23_23_plant().frictionless(), sea_23_23_controller());
    let ep = HarmonicEpisode::default();
    let traj = harmonic_episode(&sys, &ep).unwrap();
    let audit = energy_audit(&traj, &sys.plant, Some((ep.frequency, 4))).unwrap();
    let (m, l) = (audit.per_cycle_motor_work.unwrap(), audit.per_cycle_load_work.unwrap());
    assert!(l > 0.0);
    assert!((m / l - 1.0).abs() < 0.01, "motor {m} load {l}");
}

#[test]
fn energy_closes_with_friction_on_every_episode() {
    let sys = SeaSystem::new(sea_23_23_plant(), sea_23_23_controller());
    let ep = HarmonicEpisode::default();
    let episodes = [
        harmonic_episode(&sys, &ep).unwrap(),
        step_response(&sys.controller, false),
        run_closed_loop(
            &sys.plant,
            &LoadModel::InertialLoad {
                load_mass: 5.0,
                external_force: Waveform::sine(30.0, 2.0),
            },
            &sys.controller,
            Waveform::sine(200.0, 3.0),
            3.0,
            PLANT_DT,
            0,
        )
        .unwrap(),
    ];
    for traj in &episodes {
        let audit = energy_audit(traj, &sys.plant, None).unwrap();
        assert!(audit.relative_closure < 0.01, "closure {}", audit.relative_closure);
    }
}

#[test]
fn impedance_is_low_when_slow_and_spring_like_when_fast() {
    let sys = SeaSystem::new(sea_23_23_plant(), sea_23_23_controller());
    let k = sys.plant.spring_stiffness;
    let z = output_impedance(&sys, 5e-3, &[0.5, 100.0], &ImpedanceOptions::default()).unwrap();
    assert!(z[0].impedance_magnitude < 0.1 * k, "{}", z[0].impedance_magnitude);
    // Spring asymptote, and well under the reflected-inertia line m·ω².
    let inertia_line = sys.plant.motor_mass * (2.0 * PI * 100.0f64).powi(2);
    assert!(z[1].impedance_magnitude <= 1.2 * k, "{}", z[1].impedance_magnitude);
    assert!(z[1].impedance_magnitude <= 0.1 * inertia_line);
}
