//! Two-mass series elastic actuator plant.
//!
//! The drivetrain (motor, gearing, ball screw) is lumped into one output-referred
//! effort source acting on `motor_mass`. The series spring couples it to the
//! load. Positions are along the actuator axis; a positive deflection
//! `x_m - x_l` means the spring pushes the load in the positive direction.
//!
//! Integration is fixed-step classical RK4. Stick/slip is decided once per
//! step at the step boundary (Karnopp), and the motor speed limit is a hard
//! clamp applied after each step. Work and dissipation integrals ride along
//! in the RK4 state so that energy accounting is exact to integration order.

use thiserror::Error;

use crate::waveform::Waveform;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("invalid plant parameters: {0}")]
    InvalidParams(String),
    #[error("invalid load model: {0}")]
    InvalidLoad(String),
}

/// Physical parameters, all SI and referred to the actuator output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    pub motor_mass: f64,
    pub spring_stiffness: f64,
    pub spring_damping: f64,
    pub motor_viscous: f64,
    /// Breakaway and kinetic Coulomb friction magnitude.
    pub motor_coulomb: f64,
    pub max_effort_continuous: f64,
    pub max_effort_intermittent: f64,
    pub max_speed: f64,
    /// Deflection sensor quantization step; zero disables quantization.
    pub sensor_quantum: f64,
    pub sensor_noise_sigma: f64,
    /// Speeds below this count as "at rest" for the stick test.
    pub stick_velocity_band: f64,
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let all = [
            self.motor_mass,
            self.spring_stiffness,
            self.spring_damping,
            self.motor_viscous,
            self.motor_coulomb,
            self.max_effort_continuous,
            self.max_effort_intermittent,
            self.max_speed,
            self.sensor_quantum,
            self.sensor_noise_sigma,
            self.stick_velocity_band,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PlantError::NonFinite("plant parameter"));
        }
        let fail = |msg: &str| Err(PlantError::InvalidParams(msg.to_string()));
        if self.motor_mass <= 0.0 {
            return fail("motor_mass must be > 0");
        }
        if self.spring_stiffness <= 0.0 {
            return fail("spring_stiffness must be > 0");
        }
        if self.spring_damping < 0.0 || self.motor_viscous < 0.0 || self.motor_coulomb < 0.0 {
            return fail("damping and friction must be >= 0");
        }
        if self.max_effort_continuous <= 0.0 || self.max_effort_intermittent < self.max_effort_continuous {
            return fail("need max_effort_intermittent >= max_effort_continuous > 0");
        }
        if self.max_speed <= 0.0 {
            return fail("max_speed must be > 0");
        }
        if self.sensor_quantum < 0.0 || self.sensor_noise_sigma < 0.0 {
            return fail("sensor quantum and noise must be >= 0");
        }
        if self.stick_velocity_band <= 0.0 {
            return fail("stick_velocity_band must be > 0");
        }
        Ok(())
    }

    /// Same plant with the spring replaced by one `multiplier` times stiffer.
    ///
    /// The deflection sensor sits on the stiffer element and keeps the same
    /// force resolution, so its quantum and noise shrink by the same factor.
    pub fn with_stiffness_multiplier(&self, multiplier: f64) -> PlantParams {
        PlantParams {
            spring_stiffness: self.spring_stiffness * multiplier,
            sensor_quantum: self.sensor_quantum / multiplier,
            sensor_noise_sigma: self.sensor_noise_sigma / multiplier,
            ..*self
        }
    }

    /// No Coulomb or viscous friction and no spring damping.
    pub fn frictionless(&self) -> PlantParams {
        PlantParams {
            spring_damping: 0.0,
            motor_viscous: 0.0,
            motor_coulomb: 0.0,
            ..*self
        }
    }

    /// Ideal deflection sensor.
    pub fn ideal_sensor(&self) -> PlantParams {
        PlantParams {
            sensor_quantum: 0.0,
            sensor_noise_sigma: 0.0,
            ..*self
        }
    }

    pub fn clamp_effort(&self, command: f64) -> f64 {
        command.clamp(-self.max_effort_intermittent, self.max_effort_intermittent)
    }

    /// Force equivalent of one sensor quantum.
    pub fn force_quantum(&self) -> f64 {
        self.spring_stiffness * self.sensor_quantum
    }

    /// Undamped open-loop resonance against a locked load, Hz.
    pub fn locked_resonance_hz(&self) -> f64 {
        (self.spring_stiffness / self.motor_mass).sqrt() / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadModel {
    /// Rigid wall at the origin.
    Locked,
    /// Free mass driven by the spring plus an external force.
    InertialLoad { load_mass: f64, external_force: Waveform },
    /// Massless output pressing on a one-sided environment spring that starts
    /// at `rest_position`. Out of contact the output follows the motor with
    /// the series spring relaxed.
    EnvironmentSpring { contact_stiffness: f64, rest_position: f64 },
    /// Load position imposed as a function of time.
    PrescribedMotion(Waveform),
}

impl LoadModel {
    pub fn validate(&self) -> Result<(), PlantError> {
        match *self {
            LoadModel::Locked => Ok(()),
            LoadModel::InertialLoad {
                load_mass,
                external_force,
            } => {
                if !(load_mass > 0.0) || !load_mass.is_finite() {
                    return Err(PlantError::InvalidLoad("load_mass must be > 0".into()));
                }
                if !external_force.is_finite() {
                    return Err(PlantError::NonFinite("external force"));
                }
                Ok(())
            }
            LoadModel::EnvironmentSpring {
                contact_stiffness,
                rest_position,
            } => {
                if !(contact_stiffness > 0.0) || !contact_stiffness.is_finite() {
                    return Err(PlantError::InvalidLoad("contact_stiffness must be > 0".into()));
                }
                if !rest_position.is_finite() {
                    return Err(PlantError::NonFinite("rest position"));
                }
                Ok(())
            }
            LoadModel::PrescribedMotion(w) => {
                if w.is_finite() {
                    Ok(())
                } else {
                    Err(PlantError::NonFinite("prescribed motion"))
                }
            }
        }
    }

    /// Load position and velocity for loads that are not integrated states.
    fn kinematics(&self, params: &PlantParams, t: f64, x_m: f64, v_m: f64, x_l: f64, v_l: f64) -> (f64, f64) {
        match *self {
            LoadModel::Locked => (0.0, 0.0),
            LoadModel::InertialLoad { .. } => (x_l, v_l),
            LoadModel::EnvironmentSpring {
                contact_stiffness,
                rest_position,
            } => {
                if x_m > rest_position {
                    let k = params.spring_stiffness;
                    let share = k / (k + contact_stiffness);
                    (rest_position + share * (x_m - rest_position), share * v_m)
                } else {
                    (x_m, v_m)
                }
            }
            LoadModel::PrescribedMotion(w) => (w.value(t), w.rate(t)),
        }
    }
}

/// Cumulative energy flows since the start of an episode, joules.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    /// Work done by the drivetrain effort on the motor mass.
    pub effort_work: f64,
    /// Work delivered through the spring into the load.
    pub load_work: f64,
    /// Coulomb and viscous dissipation, including kinetic energy removed when
    /// the motor is captured into stick.
    pub friction_loss: f64,
    /// Dissipation in the spring's parallel damper.
    pub damper_loss: f64,
    /// Kinetic energy removed by the motor speed clamp.
    pub saturation_loss: f64,
}

impl EnergyLedger {
    pub fn dissipation(&self) -> f64 {
        self.friction_loss + self.damper_loss + self.saturation_loss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimState {
    pub time: f64,
    pub x_m: f64,
    pub v_m: f64,
    pub x_l: f64,
    pub v_l: f64,
    /// Karnopp stick flag for the step that produced this state.
    pub stuck: bool,
    /// Post-clamp effort applied during the step that produced this state.
    pub effort: f64,
    pub energy: EnergyLedger,
}

impl SimState {
    pub fn deflection(&self) -> f64 {
        self.x_m - self.x_l
    }

    /// Energy held in the actuator: motor kinetic plus spring potential.
    pub fn stored_energy(&self, params: &PlantParams) -> f64 {
        0.5 * params.motor_mass * self.v_m * self.v_m + 0.5 * params.spring_stiffness * self.deflection().powi(2)
    }

    fn is_finite(&self) -> bool {
        [self.time, self.x_m, self.v_m, self.x_l, self.v_l].iter().all(|v| v.is_finite())
    }
}

/// True spring force on the load, `K·(x_m − x_l) + b·(v_m − v_l)`.
pub fn spring_force(params: &PlantParams, state: &SimState) -> f64 {
    params.spring_stiffness * (state.x_m - state.x_l) + params.spring_damping * (state.v_m - state.v_l)
}

/// Force as reported by the deflection sensor.
///
/// The deflection is perturbed by `sensor_noise_sigma · noise_draw`, rounded to
/// the nearest quantum, then scaled by the stiffness. The sensor reads
/// position only, so the damper does not appear.
pub fn measure_force(params: &PlantParams, state: &SimState, noise_draw: f64) -> f64 {
    let mut d = state.deflection() + params.sensor_noise_sigma * noise_draw;
    if params.sensor_quantum > 0.0 {
        d = (d / params.sensor_quantum).round() * params.sensor_quantum;
    }
    params.spring_stiffness * d
}

/// Karnopp friction on the motor mass.
///
/// Inside the stick band with the net applied force below breakaway, friction
/// cancels the applied force exactly and the flag is set. Otherwise it is
/// kinetic Coulomb plus viscous; at exactly zero speed the Coulomb term opposes
/// the applied force.
pub fn friction_force(params: &PlantParams, velocity: f64, applied_net: f64) -> (f64, bool) {
    if velocity.abs() < params.stick_velocity_band && applied_net.abs() <= params.motor_coulomb {
        return (-applied_net, true);
    }
    (sliding_friction(params, velocity, applied_net), false)
}

fn sliding_friction(params: &PlantParams, velocity: f64, applied_net: f64) -> f64 {
    let direction = if velocity != 0.0 {
        velocity.signum()
    } else if applied_net != 0.0 {
        applied_net.signum()
    } else {
        0.0
    };
    -direction * params.motor_coulomb - params.motor_viscous * velocity
}

/// Integration state: motor, load, and running energy integrals.
#[derive(Clone, Copy)]
struct Y {
    x_m: f64,
    v_m: f64,
    x_l: f64,
    v_l: f64,
    effort_work: f64,
    load_work: f64,
    friction_loss: f64,
    damper_loss: f64,
}

impl Y {
    fn axpy(&self, h: f64, d: &Y) -> Y {
        Y {
            x_m: self.x_m + h * d.x_m,
            v_m: self.v_m + h * d.v_m,
            x_l: self.x_l + h * d.x_l,
            v_l: self.v_l + h * d.v_l,
            effort_work: self.effort_work + h * d.effort_work,
            load_work: self.load_work + h * d.load_work,
            friction_loss: self.friction_loss + h * d.friction_loss,
            damper_loss: self.damper_loss + h * d.damper_loss,
        }
    }

    fn rk4_combine(&self, h: f64, k1: &Y, k2: &Y, k3: &Y, k4: &Y) -> Y {
        let c = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) * h / 6.0;
        Y {
            x_m: self.x_m + c(k1.x_m, k2.x_m, k3.x_m, k4.x_m),
            v_m: self.v_m + c(k1.v_m, k2.v_m, k3.v_m, k4.v_m),
            x_l: self.x_l + c(k1.x_l, k2.x_l, k3.x_l, k4.x_l),
            v_l: self.v_l + c(k1.v_l, k2.v_l, k3.v_l, k4.v_l),
            effort_work: self.effort_work + c(k1.effort_work, k2.effort_work, k3.effort_work, k4.effort_work),
            load_work: self.load_work + c(k1.load_work, k2.load_work, k3.load_work, k4.load_work),
            friction_loss: self.friction_loss
                + c(k1.friction_loss, k2.friction_loss, k3.friction_loss, k4.friction_loss),
            damper_loss: self.damper_loss + c(k1.damper_loss, k2.damper_loss, k3.damper_loss, k4.damper_loss),
        }
    }
}

fn derivative(params: &PlantParams, load: &LoadModel, effort: f64, stuck: bool, t: f64, y: &Y) -> Y {
    let (x_l, v_l) = load.kinematics(params, t, y.x_m, y.v_m, y.x_l, y.v_l);
    let rel_v = y.v_m - v_l;
    let f_spring = params.spring_stiffness * (y.x_m - x_l) + params.spring_damping * rel_v;

    let (a_m, friction) = if stuck {
        (0.0, 0.0)
    } else {
        let fr = sliding_friction(params, y.v_m, effort - f_spring);
        ((effort + fr - f_spring) / params.motor_mass, fr)
    };
    let v_m = if stuck { 0.0 } else { y.v_m };

    let (dx_l, dv_l) = match *load {
        LoadModel::InertialLoad {
            load_mass,
            external_force,
        } => (y.v_l, (f_spring + external_force.value(t)) / load_mass),
        _ => (0.0, 0.0),
    };

    Y {
        x_m: v_m,
        v_m: a_m,
        x_l: dx_l,
        v_l: dv_l,
        effort_work: effort * v_m,
        load_work: f_spring * v_l,
        friction_loss: -friction * v_m,
        damper_loss: params.spring_damping * rel_v * rel_v,
    }
}

/// Advances the plant by one fixed RK4 step of length `dt`.
///
/// The effort command is clamped to `±max_effort_intermittent` and held for
/// the whole step. Steps up to 1 ms are stable for the shipped defaults.
pub fn step(
    params: &PlantParams,
    state: &SimState,
    motor_effort_command: f64,
    load: &LoadModel,
    dt: f64,
) -> Result<SimState, PlantError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(PlantError::BadTimeStep(dt));
    }
    if !motor_effort_command.is_finite() {
        return Err(PlantError::NonFinite("effort command"));
    }
    if !state.is_finite() {
        return Err(PlantError::NonFinite("state"));
    }

    let effort = params.clamp_effort(motor_effort_command);
    let t0 = state.time;
    let mut energy = state.energy;
    let mut v_m0 = state.v_m;

    let (x_l0, v_l0) = load.kinematics(params, t0, state.x_m, state.v_m, state.x_l, state.v_l);
    let f_spring0 = params.spring_stiffness * (state.x_m - x_l0) + params.spring_damping * (state.v_m - v_l0);
    let stuck = params.motor_coulomb > 0.0 && friction_force(params, state.v_m, effort - f_spring0).1;
    if stuck {
        energy.friction_loss += 0.5 * params.motor_mass * v_m0 * v_m0;
        v_m0 = 0.0;
    }

    let y0 = Y {
        x_m: state.x_m,
        v_m: v_m0,
        x_l: x_l0,
        v_l: v_l0,
        effort_work: energy.effort_work,
        load_work: energy.load_work,
        friction_loss: energy.friction_loss,
        damper_loss: energy.damper_loss,
    };
    let f = |t: f64, y: &Y| derivative(params, load, effort, stuck, t, y);
    let h = dt;
    let k1 = f(t0, &y0);
    let k2 = f(t0 + 0.5 * h, &y0.axpy(0.5 * h, &k1));
    let k3 = f(t0 + 0.5 * h, &y0.axpy(0.5 * h, &k2));
    let k4 = f(t0 + h, &y0.axpy(h, &k3));
    let y1 = y0.rk4_combine(h, &k1, &k2, &k3, &k4);

    let mut v_m1 = y1.v_m;
    if v_m1.abs() > params.max_speed {
        let clamped = v_m1.clamp(-params.max_speed, params.max_speed);
        energy.saturation_loss += 0.5 * params.motor_mass * (v_m1 * v_m1 - clamped * clamped);
        v_m1 = clamped;
    }

    let t1 = t0 + dt;
    let (x_l1, v_l1) = load.kinematics(params, t1, y1.x_m, v_m1, y1.x_l, y1.v_l);
    energy.effort_work = y1.effort_work;
    energy.load_work = y1.load_work;
    energy.friction_loss = y1.friction_loss;
    energy.damper_loss = y1.damper_loss;

    let next = SimState {
        time: t1,
        x_m: y1.x_m,
        v_m: v_m1,
        x_l: x_l1,
        v_l: v_l1,
        stuck,
        effort,
        energy,
    };
    if !next.is_finite() {
        return Err(PlantError::NonFinite("state after step"));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params() -> PlantParams {
        PlantParams {
            motor_mass: 10.0,
            spring_stiffness: 1e4,
            spring_damping: 0.0,
            motor_viscous: 0.0,
            motor_coulomb: 0.0,
            max_effort_continuous: 500.0,
            max_effort_intermittent: 1334.0,
            max_speed: 10.0,
            sensor_quantum: 0.0,
            sensor_noise_sigma: 0.0,
            stick_velocity_band: 1e-4,
        }
    }

    fn state(x_m: f64, v_m: f64, x_l: f64, v_l: f64) -> SimState {
        SimState {
            x_m,
            v_m,
            x_l,
            v_l,
            ..SimState::default()
        }
    }

    #[test]
    fn spring_force_examples() {
        let mut p = params();
        p.spring_stiffness = 1000.0;
        assert_eq!(spring_force(&p, &state(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert!((spring_force(&p, &state(0.03, 0.0, 0.02, 0.0)) - 10.0).abs() < 1e-12);

        p.spring_stiffness = 2.2508e5;
        let f = spring_force(&p, &state(5.928e-3, 0.0, 0.0, 0.0));
        assert!((f - 1334.27).abs() < 0.5, "{f}");
        assert!((f / crate::units::NEWTONS_PER_POUND_FORCE - 300.0).abs() < 0.1);
    }

    #[test]
    fn damping_enters_spring_force() {
        let mut p = params();
        p.spring_damping = 50.0;
        let f = spring_force(&p, &state(0.0, 0.2, 0.0, -0.1));
        assert!((f - 15.0).abs() < 1e-12);
    }

    #[test]
    fn measure_force_quantization() {
        let mut p = params();
        let s = state(1e-3, 0.0, 0.0, 0.0);
        assert_eq!(measure_force(&p, &s, 0.7), p.spring_stiffness * 1e-3);

        p.spring_stiffness = 2.2508e5;
        p.sensor_quantum = 2e-5;
        let f = measure_force(&p, &state(1e-5, 0.0, 0.0, 0.0), 0.0);
        assert!((f - 4.5016).abs() < 1e-9, "{f}");
        assert_eq!(measure_force(&p, &state(9e-6, 0.0, 0.0, 0.0), 0.0), 0.0);
    }

    #[test]
    fn measure_force_ignores_damper_and_applies_noise() {
        let mut p = params();
        p.spring_damping = 100.0;
        p.sensor_noise_sigma = 1e-4;
        let f = measure_force(&p, &state(0.0, 1.0, 0.0, 0.0), 2.0);
        assert!((f - p.spring_stiffness * 2e-4).abs() < 1e-9);
    }

    #[test]
    fn friction_examples() {
        let mut p = params();
        p.motor_coulomb = 4.5;
        assert_eq!(friction_force(&p, 0.0, 3.0), (-3.0, true));
        assert_eq!(friction_force(&p, 0.1, 0.0), (-4.5, false));
        p.motor_coulomb = 0.0;
        p.motor_viscous = 10.0;
        let (f, stuck) = friction_force(&p, 0.2, 0.0);
        assert!(!stuck);
        assert!((f + 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = params();
        let s0 = SimState::default();
        for dt in [1e-5, 1e-4, 1e-3] {
            let s = step(&p, &s0, 0.0, &LoadModel::Locked, dt).unwrap();
            assert_eq!((s.x_m, s.v_m, s.x_l, s.v_l), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn effort_is_clamped() {
        let p = params();
        let dt = 1e-6;
        let s = step(&p, &SimState::default(), 1e6, &LoadModel::Locked, dt).unwrap();
        assert_eq!(s.effort, 1334.0);
        // Spring force is negligible over one microstep.
        let accel = s.v_m / dt;
        assert!((accel - 1334.0 / p.motor_mass).abs() / accel < 1e-4, "{accel}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params();
        let s = SimState::default();
        assert!(matches!(step(&p, &s, 0.0, &LoadModel::Locked, 0.0), Err(PlantError::BadTimeStep(_))));
        assert!(matches!(step(&p, &s, 0.0, &LoadModel::Locked, -1e-4), Err(PlantError::BadTimeStep(_))));
        assert!(step(&p, &s, f64::NAN, &LoadModel::Locked, 1e-4).is_err());
        let bad = state(f64::INFINITY, 0.0, 0.0, 0.0);
        assert!(step(&p, &bad, 0.0, &LoadModel::Locked, 1e-4).is_err());
    }

    #[test]
    fn locked_load_stays_zero() {
        let p = params();
        let mut s = state(0.01, 0.0, 0.0, 0.0);
        for _ in 0..1000 {
            s = step(&p, &s, 300.0, &LoadModel::Locked, 1e-4).unwrap();
            assert_eq!((s.x_l, s.v_l), (0.0, 0.0));
        }
    }

    #[test]
    fn harmonic_oscillation_matches_closed_form() {
        // m = 10 kg, K = 1e4 N/m: ω = 31.623 rad/s, energy 0.5 J.
        let p = params();
        let dt = 1e-4;
        let mut s = state(0.01, 0.0, 0.0, 0.0);
        let e0 = s.stored_energy(&p);
        assert!((e0 - 0.5).abs() < 1e-12);
        let omega = (p.spring_stiffness / p.motor_mass).sqrt();
        for _ in 0..10_000 {
            s = step(&p, &s, 0.0, &LoadModel::Locked, dt).unwrap();
        }
        let expected = 0.01 * (omega * s.time).cos();
        assert!((s.x_m - expected).abs() < 1e-7, "{} vs {}", s.x_m, expected);
        assert!((s.stored_energy(&p) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stick_holds_below_breakaway() {
        let mut p = params();
        p.motor_coulomb = 5.0;
        let s = step(&p, &SimState::default(), 4.0, &LoadModel::Locked, 1e-4).unwrap();
        assert!(s.stuck);
        assert_eq!((s.x_m, s.v_m), (0.0, 0.0));
        let s = step(&p, &SimState::default(), 6.0, &LoadModel::Locked, 1e-4).unwrap();
        assert!(!s.stuck);
        assert!(s.v_m > 0.0);
    }

    #[test]
    fn speed_clamp_records_loss() {
        let mut p = params();
        p.max_speed = 0.01;
        let mut s = SimState::default();
        for _ in 0..100 {
            s = step(&p, &s, 1334.0, &LoadModel::Locked, 1e-4).unwrap();
            assert!(s.v_m.abs() <= p.max_speed);
        }
        assert!(s.energy.saturation_loss > 0.0);
    }

    #[test]
    fn environment_spring_splits_deflection() {
        let p = params();
        let load = LoadModel::EnvironmentSpring {
            contact_stiffness: 3e4,
            rest_position: 0.0,
        };
        let s = step(&p, &state(0.004, 0.0, 0.0, 0.0), 0.0, &load, 1e-6).unwrap();
        // Series springs: K·d equals k_c·x_l.
        let f_series = p.spring_stiffness * s.deflection();
        assert!((f_series - 3e4 * s.x_l).abs() < 1e-6);
        // Out of contact the spring is relaxed.
        let s = step(&p, &state(-0.004, 0.0, 0.0, 0.0), 0.0, &load, 1e-6).unwrap();
        assert_eq!(s.deflection(), 0.0);
    }

    #[test]
    fn prescribed_motion_reads_trajectory() {
        let p = params();
        let w = Waveform::sine(0.005, 3.0);
        let mut s = SimState::default();
        for _ in 0..50 {
            s = step(&p, &s, 0.0, &LoadModel::PrescribedMotion(w), 1e-4).unwrap();
        }
        assert!((s.x_l - w.value(s.time)).abs() < 1e-15);
        assert!((s.v_l - 0.005 * 2.0 * PI * 3.0 * (2.0 * PI * 3.0 * s.time).cos()).abs() < 1e-12);
    }

    #[test]
    fn two_mass_energy_closes() {
        let mut p = params();
        p.spring_damping = 20.0;
        p.motor_coulomb = 2.0;
        p.motor_viscous = 5.0;
        let load = LoadModel::InertialLoad {
            load_mass: 2.0,
            external_force: Waveform::Zero,
        };
        let mut s = SimState::default();
        for k in 0..20_000 {
            let u = 200.0 * (k as f64 * 1e-4 * 2.0 * PI).sin();
            s = step(&p, &s, u, &load, 1e-4).unwrap();
        }
        let load_ke = 0.5 * 2.0 * s.v_l * s.v_l;
        let e = s.energy;
        // With no external force, all load work ends up as load kinetic energy.
        assert!((e.load_work - load_ke).abs() < 1e-6 * e.effort_work.abs().max(1.0));
        let closure = e.effort_work - e.load_work - e.dissipation() - s.stored_energy(&p);
        assert!(closure.abs() < 1e-6 * e.effort_work.abs(), "{closure}");
    }

    proptest! {
        #[test]
        fn friction_is_passive_while_sliding(v in -1.0f64..1.0, applied in -20.0f64..20.0, coulomb in 0.0f64..10.0, visc in 0.0f64..50.0) {
            let mut p = params();
            p.motor_coulomb = coulomb;
            p.motor_viscous = visc;
            let (f, stuck) = friction_force(&p, v, applied);
            if stuck {
                prop_assert_eq!(f + applied, 0.0);
            } else {
                prop_assert!(f * v <= 0.0);
            }
        }

        #[test]
        fn saturation_holds_every_step(cmd in -1e5f64..1e5, x0 in -0.01f64..0.01) {
            let mut p = params();
            p.max_speed = 0.05;
            let mut s = state(x0, 0.0, 0.0, 0.0);
            for _ in 0..200 {
                s = step(&p, &s, cmd, &LoadModel::Locked, 1e-4).unwrap();
                prop_assert!(s.effort.abs() <= p.max_effort_intermittent);
                prop_assert!(s.v_m.abs() <= p.max_speed);
            }
        }
    }
}
