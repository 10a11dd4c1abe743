//! PD force servo on the measured spring deflection, an optional position
//! loop cascaded on top of it, and the fixed-rate closed-loop runner.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::plant::{self, EnergyLedger, LoadModel, PlantError, PlantParams, SimState};
use crate::waveform::Waveform;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("non-finite controller input: {0}")]
    NonFinite(&'static str),
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("sample period {sample_period} s is not an integer multiple of dt {dt} s")]
    SamplePeriodMismatch { sample_period: f64, dt: f64 },
    #[error("duration must be positive, got {0} s")]
    BadDuration(f64),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    /// Effort per newton of force error.
    pub kp: f64,
    /// Effort per newton-per-second of filtered force-error rate.
    pub kd: f64,
    /// Add the desired force to the command.
    pub feedforward: bool,
    pub sample_period: f64,
    /// First-order filter time constant on the error derivative; zero disables.
    pub derivative_filter_tc: f64,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let vals = [self.kp, self.kd, self.sample_period, self.derivative_filter_tc];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(ControlError::NonFinite("controller gain"));
        }
        if self.kp < 0.0 || self.kd < 0.0 || self.derivative_filter_tc < 0.0 {
            return Err(ControlError::InvalidConfig("gains and filter constant must be >= 0".into()));
        }
        if self.sample_period <= 0.0 {
            return Err(ControlError::InvalidConfig("sample_period must be > 0".into()));
        }
        Ok(())
    }

    /// Zero gains and no feedforward: the drivetrain applies no effort.
    pub fn passive(sample_period: f64) -> Self {
        Self {
            kp: 0.0,
            kd: 0.0,
            feedforward: false,
            sample_period,
            derivative_filter_tc: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionLoopConfig {
    pub kp_pos: f64,
    pub kd_pos: f64,
    /// Clamp on the force handed to the inner loop.
    pub force_limit: f64,
}

impl PositionLoopConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.kp_pos >= 0.0 && self.kd_pos >= 0.0) {
            return Err(ControlError::InvalidConfig("position gains must be >= 0".into()));
        }
        if !(self.force_limit > 0.0) {
            return Err(ControlError::InvalidConfig("force_limit must be > 0".into()));
        }
        Ok(())
    }
}

/// `u = [F_des] + kp·(F_des − F_meas) + kd·ė_filtered`. Saturation is the
/// plant's job.
pub fn pd_force_command(
    cfg: &ControllerConfig,
    desired: f64,
    measured: f64,
    filtered_error_rate: f64,
) -> Result<f64, ControlError> {
    if !desired.is_finite() || !measured.is_finite() || !filtered_error_rate.is_finite() {
        return Err(ControlError::NonFinite("force or rate"));
    }
    let ff = if cfg.feedforward { desired } else { 0.0 };
    Ok(ff + cfg.kp * (desired - measured) + cfg.kd * filtered_error_rate)
}

/// Outer position loop on the load: returns the force command for the inner loop.
pub fn position_over_force(cfg: &PositionLoopConfig, x_des: f64, state: &SimState) -> f64 {
    let f = cfg.kp_pos * (x_des - state.x_l) - cfg.kd_pos * state.v_l;
    f.clamp(-cfg.force_limit, cfg.force_limit)
}

/// Discrete PD force loop with its derivative-filter memory.
#[derive(Debug, Clone)]
pub struct PdForceLoop {
    cfg: ControllerConfig,
    prev_error: Option<f64>,
    filtered_rate: f64,
}

impl PdForceLoop {
    pub fn new(cfg: ControllerConfig) -> Self {
        Self {
            cfg,
            prev_error: None,
            filtered_rate: 0.0,
        }
    }

    pub fn filtered_rate(&self) -> f64 {
        self.filtered_rate
    }

    /// One controller tick.
    pub fn update(&mut self, desired: f64, measured: f64) -> Result<f64, ControlError> {
        let error = desired - measured;
        if let Some(prev) = self.prev_error {
            let ts = self.cfg.sample_period;
            let raw = (error - prev) / ts;
            if self.cfg.derivative_filter_tc > 0.0 {
                let alpha = ts / (self.cfg.derivative_filter_tc + ts);
                self.filtered_rate += alpha * (raw - self.filtered_rate);
            } else {
                self.filtered_rate = raw;
            }
        }
        self.prev_error = Some(error);
        pd_force_command(&self.cfg, desired, measured, self.filtered_rate)
    }
}

/// What the outer layer asks of the force loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Force(Waveform),
    /// Track a load position through the cascaded position loop.
    Position { loop_cfg: PositionLoopConfig, target: Waveform },
}

/// One logged sample. The first ten numeric fields plus `stuck` form the CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub x_m: f64,
    pub v_m: f64,
    pub x_l: f64,
    pub v_l: f64,
    pub deflection: f64,
    pub force_true: f64,
    pub force_meas: f64,
    /// Desired force at the most recent controller tick.
    pub cmd: f64,
    /// Post-clamp effort held from this sample to the next.
    pub effort: f64,
    pub stuck: bool,
    /// Cumulative energy flows up to this sample.
    pub energy: EnergyLedger,
    pub stored_energy: f64,
}

pub const TRAJECTORY_CSV_HEADER: [&str; 11] = [
    "time_s",
    "x_m",
    "v_m",
    "x_l",
    "v_l",
    "deflection_m",
    "force_true_N",
    "force_meas_N",
    "cmd_N",
    "effort_N",
    "stuck",
];

/// Uniform-rate episode log.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub seed: u64,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRAJECTORY_CSV_HEADER)?;
        for r in &self.records {
            w.write_record(&[
                r.time.to_string(),
                r.x_m.to_string(),
                r.v_m.to_string(),
                r.x_l.to_string(),
                r.v_l.to_string(),
                r.deflection.to_string(),
                r.force_true.to_string(),
                r.force_meas.to_string(),
                r.cmd.to_string(),
                r.effort.to_string(),
                u8::from(r.stuck).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A complete closed-loop episode description.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub plant: PlantParams,
    pub load: LoadModel,
    pub controller: ControllerConfig,
    pub command: Command,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub initial: SimState,
}

impl Episode {
    pub fn new(plant: PlantParams, load: LoadModel, controller: ControllerConfig, command: Command) -> Self {
        Self {
            plant,
            load,
            controller,
            command,
            duration: 1.0,
            dt: 1e-4,
            seed: 0,
            initial: SimState::default(),
        }
    }

    pub fn duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn initial(mut self, initial: SimState) -> Self {
        self.initial = initial;
        self
    }

    /// Plant steps per controller tick.
    pub fn steps_per_tick(&self) -> Result<usize, ControlError> {
        let ratio = self.controller.sample_period / self.dt;
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * rounded {
            return Err(ControlError::SamplePeriodMismatch {
                sample_period: self.controller.sample_period,
                dt: self.dt,
            });
        }
        Ok(rounded as usize)
    }

    /// Runs the episode and keeps the full log.
    pub fn run(&self) -> Result<Trajectory, ControlError> {
        let mut records = Vec::with_capacity((self.duration / self.dt).round() as usize + 1);
        self.run_with(|r| records.push(*r))?;
        Ok(Trajectory {
            dt: self.dt,
            seed: self.seed,
            records,
        })
    }

    /// Runs the episode, handing each record to `observe` instead of storing it.
    ///
    /// The controller samples the quantized, noisy force every
    /// `sample_period` and its effort is held in between.
    pub fn run_with(&self, mut observe: impl FnMut(&TrajectoryRecord)) -> Result<(), ControlError> {
        self.plant.validate()?;
        self.load.validate()?;
        self.controller.validate()?;
        if let Command::Position { loop_cfg, .. } = &self.command {
            loop_cfg.validate()?;
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(ControlError::BadDuration(self.duration));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(PlantError::BadTimeStep(self.dt).into());
        }
        let per_tick = self.steps_per_tick()?;
        let steps = (self.duration / self.dt).round() as usize;

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pd = PdForceLoop::new(self.controller);
        let mut state = SimState {
            time: 0.0,
            ..self.initial
        };
        let (mut desired, mut measured, mut effort_cmd) = (0.0, 0.0, 0.0);

        for k in 0..=steps {
            let t = k as f64 * self.dt;
            state.time = t;
            if k % per_tick == 0 {
                let noise: f64 = rng.sample(StandardNormal);
                measured = plant::measure_force(&self.plant, &state, noise);
                desired = match &self.command {
                    Command::Force(w) => w.value(t),
                    Command::Position { loop_cfg, target } => position_over_force(loop_cfg, target.value(t), &state),
                };
                effort_cmd = pd.update(desired, measured)?;
            }
            observe(&TrajectoryRecord {
                time: t,
                x_m: state.x_m,
                v_m: state.v_m,
                x_l: state.x_l,
                v_l: state.v_l,
                deflection: state.deflection(),
                force_true: plant::spring_force(&self.plant, &state),
                force_meas: measured,
                cmd: desired,
                effort: self.plant.clamp_effort(effort_cmd),
                stuck: state.stuck,
                energy: state.energy,
                stored_energy: state.stored_energy(&self.plant),
            });
            if k < steps {
                state = plant::step(&self.plant, &state, effort_cmd, &self.load, self.dt)?;
            }
        }
        Ok(())
    }
}

/// Force-command episode from rest.
#[allow(clippy::too_many_arguments)]
pub fn run_closed_loop(
    plant: &PlantParams,
    load: &LoadModel,
    cfg: &ControllerConfig,
    command: Waveform,
    duration: f64,
    dt: f64,
    noise_seed: u64,
) -> Result<Trajectory, ControlError> {
    Episode::new(*plant, *load, *cfg, Command::Force(command))
        .duration(duration)
        .dt(dt)
        .seed(noise_seed)
        .run()
}
