//! Shipped default constants and per-actuator presets.
//!
//! The datasheet gives forces, speeds and bandwidths but no inertia, gains,
//! friction or sensor data. Everything below that is not derived from the
//! catalog is a modeling choice, collected here so there is one place to read
//! and change it.
//!
//! Tuning procedure for the per-actuator `motor_mass`, `kp` and `kd`
//! (`cargo run --release -p sea-core --example tune_presets` reruns it):
//!
//! 1. Fix the spring from [`derive_spring_stiffness`] at the peak force.
//! 2. Sweep the reflected motor mass. Under a hard speed clamp alone the
//!    large-force response degrades to a triangle wave whose fundamental only
//!    reaches −3 dB near 1.8× the speed-saturation frequency; the finite
//!    effort available to reverse a heavy drivetrain is what pulls the
//!    measured large-force bandwidth back toward the saturation law. Pick the
//!    mass that lands the large-force bandwidth near the listed value.
//! 3. With that mass, sweep `kp` and `kd` (feedforward on, 1 kHz, 1 ms
//!    derivative filter). Keep a pair whose small-force bandwidth is near the
//!    listed value, that settles a contact step at ×1 stiffness with under
//!    50% overshoot, and that chatters against the same contact at ×100.
//!    Once the mass is fixed the small-force bandwidth is mostly effort
//!    limited, so the gains mainly trade contact overshoot against the
//!    stiff-sensor chatter margin.

use crate::catalog::{derive_spring_stiffness, ActuatorSpec};
use crate::control::ControllerConfig;
use crate::plant::PlantParams;
use crate::units::{Unit, NEWTONS_PER_POUND_FORCE};

/// Plant integration step, s.
pub const PLANT_DT: f64 = 1e-4;
/// Controller sample period (1 kHz), s.
pub const SAMPLE_PERIOD: f64 = 1e-3;
/// Derivative filter time constant, s.
pub const DERIVATIVE_FILTER_TC: f64 = 1e-3;
/// Output-referred breakaway friction, N (about 1 lbf).
pub const MOTOR_COULOMB: f64 = 4.45;
pub const MOTOR_VISCOUS: f64 = 0.0;
/// Spring damping as a fraction of `sqrt(K·m)`.
pub const STRUCTURAL_DAMPING_FRACTION: f64 = 0.02;
pub const STICK_VELOCITY_BAND: f64 = 1e-4;
pub const SENSOR_NOISE_SIGMA: f64 = 0.0;
/// Deflection quantum for SEA-23-23: `K · quantum ≈ 1 lbf`.
pub const SEA_23_23_SENSOR_QUANTUM: f64 = 2e-5;

/// Small-force test amplitude as a fraction of the continuous rating.
pub const SMALL_FORCE_FRACTION: f64 = 0.1;
/// Stiffness multiplier standing in for a stiff load cell.
pub const RIGID_PROXY_MULTIPLIER: f64 = 100.0;
/// Prescribed load-motion amplitude for impedance sweeps, m.
pub const IMPEDANCE_AMPLITUDE: f64 = 5e-3;
/// Hard-contact stiffness for the chatter scenario, N/m: several times stiffer
/// than even the ×100 sensor, so the sensor sets the loop stiffness.
pub const CHATTER_CONTACT_STIFFNESS: f64 = 1e8;
/// Step command for the chatter scenario, N (25 lbf, a light contact force).
pub const CHATTER_COMMAND: f64 = 25.0 * NEWTONS_PER_POUND_FORCE;

/// Reflected mass and PD gains chosen per actuator by the tuning procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub motor_mass: f64,
    pub kp: f64,
    pub kd: f64,
}

/// Per-actuator tuning. The hydraulic entries list no intermittent force, so
/// a small-force test has only 10× effort headroom and both bandwidths are
/// effort limited; their ratio cannot reach the listed 5:1. Those presets
/// match the small-force figure and overshoot the large-force one.
pub fn tuning_for(name: &str) -> Tuning {
    let (motor_mass, kp, kd) = match name {
        "SEA-12-25" => (75.0, 40.0, 0.2),
        "HyEA-75-32" => (22.0, 10.0, 0.1),
        "HyEA-50-31" => (10.0, 10.0, 0.1),
        _ => (200.0, 10.0, 0.1),
    };
    Tuning { motor_mass, kp, kd }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorPreset {
    pub plant: PlantParams,
    pub controller: ControllerConfig,
}

fn round_sig2(x: f64) -> f64 {
    let mag = 10f64.powf(x.abs().log10().floor() - 1.0);
    (x / mag).round() * mag
}

/// Plant and controller for a catalog entry using the shipped constants.
pub fn preset_for(spec: &ActuatorSpec) -> ActuatorPreset {
    preset_with_tuning(spec, tuning_for(spec.name))
}

pub fn preset_with_tuning(spec: &ActuatorSpec, tuning: Tuning) -> ActuatorPreset {
    let k = derive_spring_stiffness(spec, None, Unit::NewtonPerMeter)
        .expect("built-in specs have positive ratings")
        .stiffness
        .magnitude;
    let quantum = if spec.name == "SEA-23-23" {
        SEA_23_23_SENSOR_QUANTUM
    } else {
        round_sig2(NEWTONS_PER_POUND_FORCE / k)
    };
    let plant = PlantParams {
        motor_mass: tuning.motor_mass,
        spring_stiffness: k,
        spring_damping: STRUCTURAL_DAMPING_FRACTION * (k * tuning.motor_mass).sqrt(),
        motor_viscous: MOTOR_VISCOUS,
        motor_coulomb: MOTOR_COULOMB,
        max_effort_continuous: spec.continuous_force.si(),
        max_effort_intermittent: spec.peak_force().si(),
        max_speed: spec.max_speed.si(),
        sensor_quantum: quantum,
        sensor_noise_sigma: SENSOR_NOISE_SIGMA,
        stick_velocity_band: STICK_VELOCITY_BAND,
    };
    let controller = ControllerConfig {
        kp: tuning.kp,
        kd: tuning.kd,
        feedforward: true,
        sample_period: SAMPLE_PERIOD,
        derivative_filter_tc: DERIVATIVE_FILTER_TC,
    };
    ActuatorPreset { plant, controller }
}

pub fn sea_23_23() -> ActuatorPreset {
    let spec = crate::catalog::find_spec("SEA-23-23").expect("built-in");
    preset_for(&spec)
}

pub fn sea_23_23_plant() -> PlantParams {
    sea_23_23().plant
}

pub fn sea_23_23_controller() -> ControllerConfig {
    sea_23_23().controller
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;

    #[test]
    fn presets_are_valid() {
        for spec in builtin_catalog() {
            let p = preset_for(&spec);
            p.plant.validate().unwrap();
            p.controller.validate().unwrap();
        }
    }

    #[test]
    fn sea_23_23_constants() {
        let p = sea_23_23_plant();
        assert!((p.spring_stiffness / 2.2508e5 - 1.0).abs() < 1e-4);
        assert_eq!(p.sensor_quantum, 2e-5);
        assert!((p.force_quantum() - 4.50).abs() < 0.01);
        assert!((p.max_effort_intermittent - 300.0 * NEWTONS_PER_POUND_FORCE).abs() < 1e-9);
        assert!((p.max_speed - 0.2794).abs() < 1e-12);
    }

    #[test]
    fn quantum_is_about_one_pound_everywhere() {
        for spec in builtin_catalog() {
            let q = preset_for(&spec).plant.force_quantum();
            assert!((q / NEWTONS_PER_POUND_FORCE - 1.0).abs() < 0.05, "{}: {q}", spec.name);
        }
    }
}
