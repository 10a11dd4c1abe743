use rayon::prelude::*;

use super::{AnalysisError, SeaSystem};
use crate::control::{Command, Episode};
use crate::plant::LoadModel;
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionOptions {
    /// Search grid step, N.
    pub grid: f64,
    /// Largest magnitude tried, N.
    pub upper: f64,
    /// Allowed relative error of the steady-state measured force.
    pub tolerance: f64,
    pub step_duration: f64,
    /// Trailing window averaged as "steady state", s.
    pub average_window: f64,
}

impl Default for ResolutionOptions {
    fn default() -> Self {
        Self {
            grid: 0.1,
            upper: 50.0,
            tolerance: 0.25,
            step_duration: 1.5,
            average_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionResult {
    /// Smallest resolving magnitude on the grid, or `upper` when censored.
    pub threshold: f64,
    /// Even `upper` failed to resolve.
    pub censored: bool,
    pub evaluations: usize,
}

/// Measured force over the trailing window of a locked-load step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyForce {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of the measured force over the trailing window of a step to
/// `magnitude` against a locked load.
pub fn steady_measured_force(
    system: &SeaSystem,
    magnitude: f64,
    opts: &ResolutionOptions,
) -> Result<SteadyForce, AnalysisError> {
    let episode = Episode::new(
        system.plant,
        LoadModel::Locked,
        system.controller,
        Command::Force(Waveform::step(magnitude)),
    )
    .duration(opts.step_duration)
    .dt(system.dt)
    .seed(system.seed);
    let from = opts.step_duration - opts.average_window;
    let (mut sum, mut n) = (0.0, 0usize);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    episode.run_with(|r| {
        if r.time > from {
            sum += r.force_meas;
            n += 1;
            min = min.min(r.force_meas);
            max = max.max(r.force_meas);
        }
    })?;
    if n == 0 {
        return Err(AnalysisError::EmptyTrajectory);
    }
    Ok(SteadyForce {
        mean: sum / n as f64,
        min,
        max,
    })
}

/// A command resolves when the measured force settles inside the tolerance
/// band: every sample of the trailing window, not just its average. A
/// quantization limit cycle that only averages to the command has not
/// settled.
pub fn resolves(system: &SeaSystem, magnitude: f64, opts: &ResolutionOptions) -> Result<bool, AnalysisError> {
    let f = steady_measured_force(system, magnitude, opts)?;
    let band = opts.tolerance * magnitude;
    Ok((f.min - magnitude).abs() <= band && (f.max - magnitude).abs() <= band)
}

/// Smallest magnitude on the `grid`-spaced lattice in `(0, upper]` that
/// resolves.
///
/// Under quantization the resolve predicate is not monotone (a command just
/// above one quantum level can settle on it while a larger one limit-cycles
/// between two levels), so bisection would return an arbitrary crossing.
/// The lattice is scanned in ascending order instead, in parallel batches;
/// the result equals a sequential scan.
pub fn smallest_resolvable_force(system: &SeaSystem, opts: &ResolutionOptions) -> Result<ResolutionResult, AnalysisError> {
    if !(opts.grid > 0.0) || !(opts.upper >= opts.grid) {
        return Err(AnalysisError::NonPositiveAmplitude(opts.grid));
    }
    let top = (opts.upper / opts.grid).round() as u64;
    let batch = rayon::current_num_threads().max(1) as u64 * 2;
    let mut evaluations = 0;
    let mut k = 1;
    while k <= top {
        let hi = (k + batch - 1).min(top);
        let hits = (k..=hi)
            .into_par_iter()
            .map(|j| resolves(system, j as f64 * opts.grid, opts))
            .collect::<Result<Vec<bool>, _>>()?;
        if let Some(pos) = hits.iter().position(|&h| h) {
            evaluations += pos + 1;
            return Ok(ResolutionResult {
                threshold: (k + pos as u64) as f64 * opts.grid,
                censored: false,
                evaluations,
            });
        }
        evaluations += hits.len();
        k = hi + 1;
    }
    Ok(ResolutionResult {
        threshold: opts.upper,
        censored: true,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;

    #[test]
    fn ideal_plant_resolves_to_grid_floor() {
        let p = defaults::sea_23_23();
        let plant = p.plant.frictionless().ideal_sensor();
        let sys = SeaSystem::new(plant, p.controller);
        let r = smallest_resolvable_force(&sys, &ResolutionOptions::default()).unwrap();
        assert!(!r.censored);
        assert!((r.threshold - 0.1).abs() < 1e-12);
    }

    #[test]
    fn hopeless_plant_is_censored() {
        let p = defaults::sea_23_23();
        let mut plant = p.plant;
        plant.sensor_quantum = 1e-3; // 225 N per count, far coarser than 50 N
        let sys = SeaSystem::new(plant, p.controller);
        let r = smallest_resolvable_force(&sys, &ResolutionOptions::default()).unwrap();
        assert!(r.censored);
        assert_eq!(r.threshold, 50.0);
    }
}
