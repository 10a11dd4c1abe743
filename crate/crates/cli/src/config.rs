//! `section.key = value [unit]` run configuration.
//!
//! Every key has a fixed physical dimension; numbers may carry a unit suffix
//! and are stored in SI. Unknown keys, bad units and malformed lines are
//! errors carrying the 1-based line and column. [`RunConfig::emit`] writes the
//! effective configuration back out in SI so it re-parses to the same values.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::Vector3;
use sea_core::catalog::ActuatorSpec;
use sea_core::control::PositionLoopConfig;
use sea_core::defaults::{self, preset_for, CHATTER_COMMAND, CHATTER_CONTACT_STIFFNESS, IMPEDANCE_AMPLITUDE};
use sea_core::units::{Dimension, Unit};
use sea_core::{find_spec, Command, ControllerConfig, FootContact, LoadModel, PlantParams, StanceProblem, Waveform};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{line}:{column}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize, column: usize },
    #[error("{line}:{column}: `{key}` expects {expected}, got `{unit}`")]
    BadUnit {
        key: String,
        unit: String,
        expected: String,
        line: usize,
        column: usize,
    },
    #[error("{line}:{column}: {reason}")]
    Malformed { reason: String, line: usize, column: usize },
    #[error("{line}:{column}: `{key}`: {reason}")]
    BadValue {
        key: String,
        reason: String,
        line: usize,
        column: usize,
    },
    #[error("stance feet must be numbered 0..n without gaps; foot{0} is missing")]
    FootGap(usize),
}

/// What a key's value means.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Quantity(Dimension),
    /// Seconds; accepts `s` or `ms`.
    Time,
    /// A plain number whose unit is fixed by the key (e.g. N·s/m).
    Scalar(&'static str),
    Count,
    Flag,
    Text(&'static [&'static str]),
}

const LOAD_KINDS: &[&str] = &["locked", "inertial", "spring", "prescribed"];
const COMMAND_KINDS: &[&str] = &["zero", "constant", "step", "sine", "position"];

const KEYS: &[(&str, Kind)] = &[
    ("plant.motor_mass", Kind::Quantity(Dimension::Mass)),
    ("plant.spring_stiffness", Kind::Quantity(Dimension::Stiffness)),
    ("plant.spring_damping", Kind::Scalar("N*s/m")),
    ("plant.motor_viscous", Kind::Scalar("N*s/m")),
    ("plant.motor_coulomb", Kind::Quantity(Dimension::Force)),
    ("plant.max_effort_continuous", Kind::Quantity(Dimension::Force)),
    ("plant.max_effort_intermittent", Kind::Quantity(Dimension::Force)),
    ("plant.max_speed", Kind::Quantity(Dimension::Speed)),
    ("plant.sensor_quantum", Kind::Quantity(Dimension::Length)),
    ("plant.sensor_noise_sigma", Kind::Quantity(Dimension::Length)),
    ("plant.stick_velocity_band", Kind::Quantity(Dimension::Speed)),
    ("controller.kp", Kind::Scalar("")),
    ("controller.kd", Kind::Time),
    ("controller.feedforward", Kind::Flag),
    ("controller.sample_period", Kind::Time),
    ("controller.derivative_filter_tc", Kind::Time),
    ("controller.kp_pos", Kind::Scalar("N/m")),
    ("controller.kd_pos", Kind::Scalar("N*s/m")),
    ("controller.force_limit", Kind::Quantity(Dimension::Force)),
    ("load.kind", Kind::Text(LOAD_KINDS)),
    ("load.mass", Kind::Quantity(Dimension::Mass)),
    ("load.external_force", Kind::Quantity(Dimension::Force)),
    ("load.contact_stiffness", Kind::Quantity(Dimension::Stiffness)),
    ("load.rest_position", Kind::Quantity(Dimension::Length)),
    ("load.amplitude", Kind::Quantity(Dimension::Length)),
    ("load.frequency", Kind::Quantity(Dimension::Frequency)),
    ("command.kind", Kind::Text(COMMAND_KINDS)),
    ("command.amplitude", Kind::Quantity(Dimension::Force)),
    ("command.offset", Kind::Quantity(Dimension::Force)),
    ("command.frequency", Kind::Quantity(Dimension::Frequency)),
    ("command.at", Kind::Time),
    ("command.position_amplitude", Kind::Quantity(Dimension::Length)),
    ("command.duration", Kind::Time),
    ("experiment.dt", Kind::Time),
    ("experiment.amplitude", Kind::Quantity(Dimension::Force)),
    ("experiment.freq_min", Kind::Quantity(Dimension::Frequency)),
    ("experiment.freq_max", Kind::Quantity(Dimension::Frequency)),
    ("experiment.points", Kind::Count),
    ("experiment.impedance_amplitude", Kind::Quantity(Dimension::Length)),
    ("experiment.multiplier", Kind::Scalar("")),
    ("experiment.contact_stiffness", Kind::Quantity(Dimension::Stiffness)),
    ("experiment.chatter_command", Kind::Quantity(Dimension::Force)),
    ("experiment.impact_speed", Kind::Quantity(Dimension::Speed)),
    ("experiment.impact_mass", Kind::Quantity(Dimension::Mass)),
    ("experiment.resolution_grid", Kind::Quantity(Dimension::Force)),
    ("experiment.resolution_upper", Kind::Quantity(Dimension::Force)),
    ("stance.force.x", Kind::Quantity(Dimension::Force)),
    ("stance.force.y", Kind::Quantity(Dimension::Force)),
    ("stance.force.z", Kind::Quantity(Dimension::Force)),
    ("stance.moment.x", Kind::Scalar("N*m")),
    ("stance.moment.y", Kind::Scalar("N*m")),
    ("stance.moment.z", Kind::Scalar("N*m")),
    ("stance.regularization", Kind::Scalar("")),
];

const FOOT_FIELDS: &[(&str, Kind)] = &[
    ("x", Kind::Quantity(Dimension::Length)),
    ("y", Kind::Quantity(Dimension::Length)),
    ("z", Kind::Quantity(Dimension::Length)),
    ("nx", Kind::Scalar("")),
    ("ny", Kind::Scalar("")),
    ("nz", Kind::Scalar("")),
    ("mu", Kind::Scalar("")),
    ("in_contact", Kind::Flag),
    ("max_normal_force", Kind::Quantity(Dimension::Force)),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Flag(bool),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadKind {
    Locked,
    Inertial,
    Spring,
    Prescribed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadConfig {
    pub kind: LoadKind,
    pub mass: f64,
    pub external_force: f64,
    pub contact_stiffness: f64,
    pub rest_position: f64,
    pub amplitude: f64,
    pub frequency: f64,
}

impl LoadConfig {
    pub fn model(&self) -> LoadModel {
        match self.kind {
            LoadKind::Locked => LoadModel::Locked,
            LoadKind::Inertial => LoadModel::InertialLoad {
                load_mass: self.mass,
                external_force: Waveform::Constant(self.external_force),
            },
            LoadKind::Spring => LoadModel::EnvironmentSpring {
                contact_stiffness: self.contact_stiffness,
                rest_position: self.rest_position,
            },
            LoadKind::Prescribed => LoadModel::PrescribedMotion(Waveform::sine(self.amplitude, self.frequency)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandKind {
    Zero,
    Constant,
    Step,
    Sine,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandConfig {
    pub kind: CommandKind,
    pub amplitude: f64,
    pub offset: f64,
    pub frequency: f64,
    pub at: f64,
    pub position_amplitude: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub dt: f64,
    /// Bode sweep amplitude, N.
    pub amplitude: f64,
    pub freq_min: f64,
    pub freq_max: f64,
    pub points: usize,
    pub impedance_amplitude: f64,
    /// Stiffness multiplier for the stiff-sensor comparisons.
    pub multiplier: f64,
    pub contact_stiffness: f64,
    pub chatter_command: f64,
    pub impact_speed: f64,
    pub impact_mass: f64,
    pub resolution_grid: f64,
    pub resolution_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub plant: PlantParams,
    pub controller: ControllerConfig,
    pub position_loop: PositionLoopConfig,
    pub load: LoadConfig,
    pub command: CommandConfig,
    pub experiment: ExperimentConfig,
    pub stance: StanceProblem,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_actuator(&find_spec("SEA-23-23").expect("built-in"))
    }
}

fn default_stance() -> StanceProblem {
    StanceProblem::new(
        [-0.5, 0.2, 0.6].iter().map(|&x| FootContact::flat(x, 0.0, 0.0, 1.0)).collect(),
        Vector3::new(0.0, 0.0, 900.0),
        Vector3::zeros(),
    )
}

impl RunConfig {
    /// Defaults built from a catalog entry's shipped preset.
    pub fn for_actuator(spec: &ActuatorSpec) -> Self {
        let preset = preset_for(spec);
        let small = defaults::SMALL_FORCE_FRACTION * spec.continuous_force.si();
        Self {
            plant: preset.plant,
            controller: preset.controller,
            position_loop: PositionLoopConfig {
                kp_pos: 5e3,
                kd_pos: 220.0,
                force_limit: spec.peak_force().si(),
            },
            load: LoadConfig {
                kind: LoadKind::Locked,
                mass: 1.0,
                external_force: 0.0,
                contact_stiffness: CHATTER_CONTACT_STIFFNESS,
                rest_position: 0.0,
                amplitude: IMPEDANCE_AMPLITUDE,
                frequency: 1.0,
            },
            command: CommandConfig {
                kind: CommandKind::Step,
                amplitude: 100.0 * sea_core::units::NEWTONS_PER_POUND_FORCE,
                offset: 0.0,
                frequency: 1.0,
                at: 0.0,
                position_amplitude: 0.01,
                duration: 1.0,
            },
            experiment: ExperimentConfig {
                dt: defaults::PLANT_DT,
                amplitude: small,
                freq_min: 0.5,
                freq_max: 200.0,
                points: 61,
                impedance_amplitude: IMPEDANCE_AMPLITUDE,
                multiplier: defaults::RIGID_PROXY_MULTIPLIER,
                contact_stiffness: CHATTER_CONTACT_STIFFNESS,
                chatter_command: CHATTER_COMMAND,
                impact_speed: 1.0,
                impact_mass: 1.0,
                resolution_grid: 0.1,
                resolution_upper: 50.0,
            },
            stance: default_stance(),
        }
    }

    /// The force-loop command described by the `command` section.
    pub fn command(&self) -> Command {
        let c = &self.command;
        match c.kind {
            CommandKind::Zero => Command::Force(Waveform::Zero),
            CommandKind::Constant => Command::Force(Waveform::Constant(c.amplitude)),
            CommandKind::Step => Command::Force(Waveform::Step {
                at: c.at,
                amplitude: c.amplitude,
            }),
            CommandKind::Sine => Command::Force(Waveform::Sine {
                amplitude: c.amplitude,
                frequency: c.frequency,
                phase: 0.0,
                offset: c.offset,
            }),
            CommandKind::Position => Command::Position {
                loop_cfg: self.position_loop,
                target: Waveform::sine(c.position_amplitude, c.frequency),
            },
        }
    }

    /// Overlay `text` onto this configuration.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut feet: Vec<Option<FootContact>> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let Some(eq) = content.find('=') else {
                return Err(ConfigError::Malformed {
                    reason: "expected `key = value`".into(),
                    line,
                    column: indent + 1,
                });
            };
            let key = content[..eq].trim();
            let key_col = indent + 1;
            let rhs = &content[eq + 1..];
            let value_col = eq + 2 + (rhs.len() - rhs.trim_start().len());
            let rhs = rhs.trim();
            if rhs.is_empty() {
                return Err(ConfigError::Malformed {
                    reason: format!("missing value for `{key}`"),
                    line,
                    column: value_col,
                });
            }
            if !is_key(key) {
                return Err(ConfigError::Malformed {
                    reason: format!("`{key}` is not a dotted lowercase key"),
                    line,
                    column: key_col,
                });
            }
            let unknown = || ConfigError::UnknownKey {
                key: key.to_string(),
                line,
                column: key_col,
            };
            if let Some((index, field)) = foot_key(key) {
                let kind = FOOT_FIELDS.iter().find(|(f, _)| *f == field).ok_or_else(unknown)?.1;
                let value = parse_value(key, kind, rhs, line, value_col)?;
                if feet.len() <= index {
                    feet.resize(index + 1, None);
                }
                let foot = feet[index].get_or_insert_with(|| FootContact::flat(0.0, 0.0, 0.0, 1.0));
                set_foot(foot, field, value);
                continue;
            }
            let kind = KEYS.iter().find(|(k, _)| *k == key).ok_or_else(unknown)?.1;
            let value = parse_value(key, kind, rhs, line, value_col)?;
            self.set(key, value);
        }
        if !feet.is_empty() {
            if let Some(gap) = feet.iter().position(Option::is_none) {
                return Err(ConfigError::FootGap(gap));
            }
            self.stance.feet = feet.into_iter().flatten().collect();
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: Value) {
        let (num, flag, text) = match &value {
            Value::Number(v) => (*v, false, ""),
            Value::Flag(b) => (f64::NAN, *b, ""),
            Value::Text(t) => (f64::NAN, false, t.as_str()),
        };
        let p = &mut self.plant;
        let c = &mut self.controller;
        let e = &mut self.experiment;
        match key {
            "plant.motor_mass" => p.motor_mass = num,
            "plant.spring_stiffness" => p.spring_stiffness = num,
            "plant.spring_damping" => p.spring_damping = num,
            "plant.motor_viscous" => p.motor_viscous = num,
            "plant.motor_coulomb" => p.motor_coulomb = num,
            "plant.max_effort_continuous" => p.max_effort_continuous = num,
            "plant.max_effort_intermittent" => p.max_effort_intermittent = num,
            "plant.max_speed" => p.max_speed = num,
            "plant.sensor_quantum" => p.sensor_quantum = num,
            "plant.sensor_noise_sigma" => p.sensor_noise_sigma = num,
            "plant.stick_velocity_band" => p.stick_velocity_band = num,
            "controller.kp" => c.kp = num,
            "controller.kd" => c.kd = num,
            "controller.feedforward" => c.feedforward = flag,
            "controller.sample_period" => c.sample_period = num,
            "controller.derivative_filter_tc" => c.derivative_filter_tc = num,
            "controller.kp_pos" => self.position_loop.kp_pos = num,
            "controller.kd_pos" => self.position_loop.kd_pos = num,
            "controller.force_limit" => self.position_loop.force_limit = num,
            "load.kind" => {
                self.load.kind = match text {
                    "locked" => LoadKind::Locked,
                    "inertial" => LoadKind::Inertial,
                    "spring" => LoadKind::Spring,
                    _ => LoadKind::Prescribed,
                }
            }
            "load.mass" => self.load.mass = num,
            "load.external_force" => self.load.external_force = num,
            "load.contact_stiffness" => self.load.contact_stiffness = num,
            "load.rest_position" => self.load.rest_position = num,
            "load.amplitude" => self.load.amplitude = num,
            "load.frequency" => self.load.frequency = num,
            "command.kind" => {
                self.command.kind = match text {
                    "zero" => CommandKind::Zero,
                    "constant" => CommandKind::Constant,
                    "step" => CommandKind::Step,
                    "sine" => CommandKind::Sine,
                    _ => CommandKind::Position,
                }
            }
            "command.amplitude" => self.command.amplitude = num,
            "command.offset" => self.command.offset = num,
            "command.frequency" => self.command.frequency = num,
            "command.at" => self.command.at = num,
            "command.position_amplitude" => self.command.position_amplitude = num,
            "command.duration" => self.command.duration = num,
            "experiment.dt" => e.dt = num,
            "experiment.amplitude" => e.amplitude = num,
            "experiment.freq_min" => e.freq_min = num,
            "experiment.freq_max" => e.freq_max = num,
            "experiment.points" => e.points = num as usize,
            "experiment.impedance_amplitude" => e.impedance_amplitude = num,
            "experiment.multiplier" => e.multiplier = num,
            "experiment.contact_stiffness" => e.contact_stiffness = num,
            "experiment.chatter_command" => e.chatter_command = num,
            "experiment.impact_speed" => e.impact_speed = num,
            "experiment.impact_mass" => e.impact_mass = num,
            "experiment.resolution_grid" => e.resolution_grid = num,
            "experiment.resolution_upper" => e.resolution_upper = num,
            "stance.force.x" => self.stance.desired_force.x = num,
            "stance.force.y" => self.stance.desired_force.y = num,
            "stance.force.z" => self.stance.desired_force.z = num,
            "stance.moment.x" => self.stance.desired_moment.x = num,
            "stance.moment.y" => self.stance.desired_moment.y = num,
            "stance.moment.z" => self.stance.desired_moment.z = num,
            "stance.regularization" => self.stance.regularization = num,
            _ => unreachable!("key table and setter disagree on `{key}`"),
        }
    }

    /// Effective configuration as text, every key present, numbers in SI.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for &(key, kind) in KEYS {
            let head = key.split('.').next().unwrap_or("");
            if head != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = head;
            }
            let _ = writeln!(out, "{key} = {}", self.render(key, kind));
        }
        for (i, foot) in self.stance.feet.iter().enumerate() {
            let n = foot.normal;
            let fields: [(&str, String); 8] = [
                ("x", format!("{} m", foot.position.x)),
                ("y", format!("{} m", foot.position.y)),
                ("z", format!("{} m", foot.position.z)),
                ("nx", n.x.to_string()),
                ("ny", n.y.to_string()),
                ("nz", n.z.to_string()),
                ("mu", foot.friction_coefficient.to_string()),
                ("in_contact", foot.in_contact.to_string()),
            ];
            for (field, v) in fields {
                let _ = writeln!(out, "stance.foot{i}.{field} = {v}");
            }
            if let Some(cap) = foot.max_normal_force {
                let _ = writeln!(out, "stance.foot{i}.max_normal_force = {cap} N");
            }
        }
        out
    }

    fn render(&self, key: &str, kind: Kind) -> String {
        let text = |s: &str| s.to_string();
        let v = match key {
            "controller.feedforward" => return self.controller.feedforward.to_string(),
            "load.kind" => {
                return text(match self.load.kind {
                    LoadKind::Locked => "locked",
                    LoadKind::Inertial => "inertial",
                    LoadKind::Spring => "spring",
                    LoadKind::Prescribed => "prescribed",
                })
            }
            "command.kind" => {
                return text(match self.command.kind {
                    CommandKind::Zero => "zero",
                    CommandKind::Constant => "constant",
                    CommandKind::Step => "step",
                    CommandKind::Sine => "sine",
                    CommandKind::Position => "position",
                })
            }
            "experiment.points" => return self.experiment.points.to_string(),
            _ => self.number(key),
        };
        match kind {
            Kind::Quantity(d) => format!("{v} {}", Unit::si(d).symbol()),
            Kind::Time => format!("{v} s"),
            _ => v.to_string(),
        }
    }

    fn number(&self, key: &str) -> f64 {
        let p = &self.plant;
        let c = &self.controller;
        let e = &self.experiment;
        match key {
            "plant.motor_mass" => p.motor_mass,
            "plant.spring_stiffness" => p.spring_stiffness,
            "plant.spring_damping" => p.spring_damping,
            "plant.motor_viscous" => p.motor_viscous,
            "plant.motor_coulomb" => p.motor_coulomb,
            "plant.max_effort_continuous" => p.max_effort_continuous,
            "plant.max_effort_intermittent" => p.max_effort_intermittent,
            "plant.max_speed" => p.max_speed,
            "plant.sensor_quantum" => p.sensor_quantum,
            "plant.sensor_noise_sigma" => p.sensor_noise_sigma,
            "plant.stick_velocity_band" => p.stick_velocity_band,
            "controller.kp" => c.kp,
            "controller.kd" => c.kd,
            "controller.sample_period" => c.sample_period,
            "controller.derivative_filter_tc" => c.derivative_filter_tc,
            "controller.kp_pos" => self.position_loop.kp_pos,
            "controller.kd_pos" => self.position_loop.kd_pos,
            "controller.force_limit" => self.position_loop.force_limit,
            "load.mass" => self.load.mass,
            "load.external_force" => self.load.external_force,
            "load.contact_stiffness" => self.load.contact_stiffness,
            "load.rest_position" => self.load.rest_position,
            "load.amplitude" => self.load.amplitude,
            "load.frequency" => self.load.frequency,
            "command.amplitude" => self.command.amplitude,
            "command.offset" => self.command.offset,
            "command.frequency" => self.command.frequency,
            "command.at" => self.command.at,
            "command.position_amplitude" => self.command.position_amplitude,
            "command.duration" => self.command.duration,
            "experiment.dt" => e.dt,
            "experiment.amplitude" => e.amplitude,
            "experiment.freq_min" => e.freq_min,
            "experiment.freq_max" => e.freq_max,
            "experiment.impedance_amplitude" => e.impedance_amplitude,
            "experiment.multiplier" => e.multiplier,
            "experiment.contact_stiffness" => e.contact_stiffness,
            "experiment.chatter_command" => e.chatter_command,
            "experiment.impact_speed" => e.impact_speed,
            "experiment.impact_mass" => e.impact_mass,
            "experiment.resolution_grid" => e.resolution_grid,
            "experiment.resolution_upper" => e.resolution_upper,
            "stance.force.x" => self.stance.desired_force.x,
            "stance.force.y" => self.stance.desired_force.y,
            "stance.force.z" => self.stance.desired_force.z,
            "stance.moment.x" => self.stance.desired_moment.x,
            "stance.moment.y" => self.stance.desired_moment.y,
            "stance.moment.z" => self.stance.desired_moment.z,
            "stance.regularization" => self.stance.regularization,
            _ => unreachable!("no numeric field for `{key}`"),
        }
    }
}

/// Parse `text` over the SEA-23-23 defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    cfg.apply(text)?;
    Ok(cfg)
}

fn is_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|seg| {
            seg.chars().next().is_some_and(|c| c.is_ascii_lowercase())
                && seg.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        })
}

/// `stance.foot<N>.<field>` → `(N, field)`.
fn foot_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("stance.foot")?;
    let (index, field) = rest.split_once('.')?;
    if index.is_empty() || !index.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((index.parse().ok()?, field))
}

fn set_foot(foot: &mut FootContact, field: &str, value: Value) {
    let num = match value {
        Value::Number(v) => v,
        Value::Flag(b) => {
            foot.in_contact = b;
            return;
        }
        Value::Text(_) => return,
    };
    match field {
        "x" => foot.position.x = num,
        "y" => foot.position.y = num,
        "z" => foot.position.z = num,
        "nx" => foot.normal.x = num,
        "ny" => foot.normal.y = num,
        "nz" => foot.normal.z = num,
        "mu" => foot.friction_coefficient = num,
        "max_normal_force" => foot.max_normal_force = Some(num),
        _ => {}
    }
}

fn parse_value(key: &str, kind: Kind, rhs: &str, line: usize, column: usize) -> Result<Value, ConfigError> {
    let bad_value = |reason: String| ConfigError::BadValue {
        key: key.to_string(),
        reason,
        line,
        column,
    };
    match kind {
        Kind::Flag => match rhs {
            "true" => Ok(Value::Flag(true)),
            "false" => Ok(Value::Flag(false)),
            other => Err(bad_value(format!("expected true or false, got `{other}`"))),
        },
        Kind::Text(options) => {
            if options.contains(&rhs) {
                Ok(Value::Text(rhs.to_string()))
            } else {
                Err(bad_value(format!("expected one of {}, got `{rhs}`", options.join(", "))))
            }
        }
        _ => {
            let (number, suffix) = match rhs.split_once(char::is_whitespace) {
                Some((n, u)) => (n, u.trim()),
                None => (rhs, ""),
            };
            let magnitude = f64::from_str(number).map_err(|_| bad_value(format!("`{number}` is not a number")))?;
            if !magnitude.is_finite() {
                return Err(bad_value("value must be finite".into()));
            }
            let unit_col = column + rhs.len() - suffix.len();
            let bad_unit = |expected: String| ConfigError::BadUnit {
                key: key.to_string(),
                unit: suffix.to_string(),
                expected,
                line,
                column: unit_col,
            };
            let si = match kind {
                Kind::Quantity(dim) => {
                    if suffix.is_empty() {
                        magnitude
                    } else {
                        let unit = Unit::from_str(suffix).map_err(|_| bad_unit(format!("a {dim} unit")))?;
                        if unit.dimension() != dim {
                            return Err(bad_unit(format!("a {dim} unit")));
                        }
                        magnitude * unit.to_si_factor()
                    }
                }
                Kind::Time => match suffix {
                    "" | "s" => magnitude,
                    "ms" => magnitude / 1000.0,
                    _ => return Err(bad_unit("s or ms".into())),
                },
                Kind::Scalar(fixed) => {
                    if !suffix.is_empty() && suffix != fixed {
                        return Err(bad_unit(if fixed.is_empty() {
                            "no unit".into()
                        } else {
                            format!("`{fixed}` or no unit")
                        }));
                    }
                    magnitude
                }
                Kind::Count => {
                    if !suffix.is_empty() {
                        return Err(bad_unit("no unit".into()));
                    }
                    if magnitude < 0.0 || magnitude.fract() != 0.0 {
                        return Err(bad_value("expected a non-negative integer".into()));
                    }
                    magnitude
                }
                Kind::Flag | Kind::Text(_) => unreachable!(),
            };
            Ok(Value::Number(si))
        }
    }
}
