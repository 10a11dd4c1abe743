//! Measured performance metrics: force-tracking frequency response and
//! bandwidth, output impedance, force resolution, contact chatter, shock
//! transmission and energy accounting. Every quantity here is extracted from
//! simulation; nothing is read off a transfer function.

mod bode;
mod chatter;
mod energy;
mod impedance;
mod resolution;
mod shock;

use std::fmt;

use thiserror::Error;

pub use bode::{
    bandwidth_from_points, bode_force_tracking, log_frequencies, Bandwidth, BodeOptions, FreqResponsePoint,
    HALF_POWER_RATIO,
};
pub use chatter::{chatter_experiment, ChatterOptions, ChatterResult};
pub use energy::{energy_audit, harmonic_episode, EnergyAudit, HarmonicEpisode};
pub use impedance::{output_impedance, ImpedanceMode, ImpedanceOptions, ImpedancePoint};
pub use resolution::{
    resolves, smallest_resolvable_force, steady_measured_force, ResolutionOptions, ResolutionResult, SteadyForce,
};
pub use shock::{shock_test, ShockOptions, ShockResult};

use crate::control::{ControlError, ControllerConfig};
use crate::plant::PlantParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("frequency list is empty")]
    NoFrequencies,
    #[error("frequencies must be positive and strictly increasing")]
    BadFrequencies,
    #[error("first point ratio {0:.4} is already below the -3 dB threshold")]
    StartsBelowThreshold(f64),
    #[error("response at {0} Hz is unstable")]
    UnstablePoint(f64),
    #[error("stiffness multiplier must be >= 1, got {0}")]
    BadMultiplier(f64),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Plant plus force controller, and the simulation settings shared by every
/// experiment run against it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeaSystem {
    pub plant: PlantParams,
    pub controller: ControllerConfig,
    pub dt: f64,
    pub seed: u64,
}

impl SeaSystem {
    pub fn new(plant: PlantParams, controller: ControllerConfig) -> Self {
        Self {
            plant,
            controller,
            dt: crate::defaults::PLANT_DT,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same system with the spring stiffened by `multiplier`, gains unchanged.
    pub fn stiffened(&self, multiplier: f64) -> Self {
        Self {
            plant: self.plant.with_stiffness_multiplier(multiplier),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// Named scalar results of one experiment plus pass/fail flags.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub name: String,
    pub metrics: Vec<Metric>,
    pub verdicts: Vec<(String, bool)>,
    /// Paths of CSV files written alongside the report, if any.
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn metric(mut self, name: &str, value: f64, unit: &str) -> Self {
        self.metrics.push(Metric {
            name: name.to_string(),
            value,
            unit: unit.to_string(),
        });
        self
    }

    pub fn verdict(mut self, name: &str, pass: bool) -> Self {
        self.verdicts.push((name.to_string(), pass));
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.verdicts.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment: {}", self.name)?;
        let width = self
            .metrics
            .iter()
            .map(|m| m.name.len())
            .chain(self.verdicts.iter().map(|(n, _)| n.len()))
            .max()
            .unwrap_or(0);
        for m in &self.metrics {
            writeln!(f, "  {:<width$}  {:>14.6}  {}", m.name, m.value, m.unit)?;
        }
        for (name, ok) in &self.verdicts {
            writeln!(f, "  {:<width$}  {:>14}", name, if *ok { "yes" } else { "no" })?;
        }
        for a in &self.artifacts {
            writeln!(f, "  artifact: {a}")?;
        }
        Ok(())
    }
}

/// Complex amplitude of the `frequency` component of uniformly sampled data,
/// normalized so that `a·sin(ωt + φ)` maps to magnitude `a`.
pub(crate) fn fundamental(times: &[f64], values: &[f64], frequency: f64) -> (f64, f64) {
    debug_assert_eq!(times.len(), values.len());
    let w = 2.0 * std::f64::consts::PI * frequency;
    let (mut re, mut im) = (0.0, 0.0);
    for (&t, &y) in times.iter().zip(values) {
        let (s, c) = (w * t).sin_cos();
        re += y * c;
        im -= y * s;
    }
    let n = times.len() as f64;
    (2.0 * re / n, 2.0 * im / n)
}

pub(crate) fn magnitude((re, im): (f64, f64)) -> f64 {
    re.hypot(im)
}

/// Phase of a fundamental relative to a pure `sin(ωt)` reference, degrees in (−180, 180].
pub(crate) fn phase_vs_sine((re, im): (f64, f64)) -> f64 {
    // sin(ωt) has coefficient (0, −1), i.e. angle −90°.
    let mut deg = im.atan2(re).to_degrees() + 90.0;
    while deg > 180.0 {
        deg -= 360.0;
    }
    while deg <= -180.0 {
        deg += 360.0;
    }
    deg
}

fn check_frequencies(frequencies: &[f64]) -> Result<(), AnalysisError> {
    if frequencies.is_empty() {
        return Err(AnalysisError::NoFrequencies);
    }
    if frequencies.iter().any(|f| !(*f > 0.0) || !f.is_finite())
        || frequencies.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(AnalysisError::BadFrequencies);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fundamental_recovers_amplitude_and_phase() {
        let f = 7.0;
        let n = 1000;
        let t: Vec<f64> = (0..n).map(|k| k as f64 * (3.0 / f) / n as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| 2.5 * (2.0 * PI * f * t - 0.3).sin() + 1.0).collect();
        let c = fundamental(&t, &y, f);
        assert!((magnitude(c) - 2.5).abs() < 1e-9);
        assert!((phase_vs_sine(c) + 0.3_f64.to_degrees()).abs() < 1e-7);
    }

    #[test]
    fn report_lookup() {
        let r = ExperimentReport::new("x").metric("a", 1.5, "N").verdict("ok", true);
        assert_eq!(r.get("a"), Some(1.5));
        assert_eq!(r.flag("ok"), Some(true));
        assert!(r.to_string().contains("experiment: x"));
    }
}
