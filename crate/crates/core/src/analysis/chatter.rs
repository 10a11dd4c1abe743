use super::{AnalysisError, ExperimentReport, SeaSystem};
use crate::control::{Command, ControlError, Episode};
use crate::defaults::{CHATTER_COMMAND, CHATTER_CONTACT_STIFFNESS};
use crate::plant::LoadModel;
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatterOptions {
    /// Step force command, N.
    pub command: f64,
    pub contact_stiffness: f64,
    pub duration: f64,
    /// Trailing fraction of the run used for the sustained-oscillation measure.
    pub tail_fraction: f64,
    /// Chatter when the sustained half peak-to-peak exceeds this fraction of the command.
    pub chatter_fraction: f64,
}

impl Default for ChatterOptions {
    fn default() -> Self {
        Self {
            command: CHATTER_COMMAND,
            contact_stiffness: CHATTER_CONTACT_STIFFNESS,
            duration: 1.0,
            tail_fraction: 0.2,
            chatter_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChatterResult {
    pub multiplier: f64,
    pub peak_force: f64,
    /// `max(0, peak/command − 1)`.
    pub overshoot: f64,
    /// Half peak-to-peak force over the trailing window.
    pub sustained_amplitude: f64,
    pub diverged: bool,
    pub chatter: bool,
}

impl ChatterResult {
    pub fn report(&self) -> ExperimentReport {
        ExperimentReport::new(format!("chatter x{}", self.multiplier))
            .metric("stiffness_multiplier", self.multiplier, "1")
            .metric("peak_force", self.peak_force, "N")
            .metric("overshoot", self.overshoot, "1")
            .metric("sustained_amplitude", self.sustained_amplitude, "N")
            .verdict("chatter", self.chatter)
            .verdict("bounded", !self.chatter)
    }
}

/// Step force into a stiff one-sided contact with the spring stiffened by
/// `multiplier`, gains unchanged.
pub fn chatter_experiment(
    base: &SeaSystem,
    multiplier: f64,
    opts: &ChatterOptions,
) -> Result<ChatterResult, AnalysisError> {
    if !(multiplier >= 1.0) || !multiplier.is_finite() {
        return Err(AnalysisError::BadMultiplier(multiplier));
    }
    if !(opts.command > 0.0) {
        return Err(AnalysisError::NonPositiveAmplitude(opts.command));
    }
    let sys = base.stiffened(multiplier);
    let episode = Episode::new(
        sys.plant,
        LoadModel::EnvironmentSpring {
            contact_stiffness: opts.contact_stiffness,
            rest_position: 0.0,
        },
        sys.controller,
        Command::Force(Waveform::step(opts.command)),
    )
    .duration(opts.duration)
    .dt(sys.dt)
    .seed(sys.seed);

    let tail_from = opts.duration * (1.0 - opts.tail_fraction);
    let mut peak = f64::NEG_INFINITY;
    let (mut tail_min, mut tail_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let run = episode.run_with(|r| {
        peak = peak.max(r.force_true);
        if r.time >= tail_from {
            tail_min = tail_min.min(r.force_true);
            tail_max = tail_max.max(r.force_true);
        }
    });
    let diverged = match run {
        Ok(()) => !(peak.is_finite() && tail_min.is_finite() && tail_max.is_finite()),
        Err(ControlError::Plant(_)) | Err(ControlError::NonFinite(_)) => true,
        Err(e) => return Err(e.into()),
    };
    let sustained = if diverged { f64::INFINITY } else { 0.5 * (tail_max - tail_min) };
    let peak = if diverged { f64::INFINITY } else { peak };
    Ok(ChatterResult {
        multiplier,
        peak_force: peak,
        overshoot: (peak / opts.command - 1.0).max(0.0),
        sustained_amplitude: sustained,
        diverged,
        chatter: diverged || sustained > opts.chatter_fraction * opts.command,
    })
}
