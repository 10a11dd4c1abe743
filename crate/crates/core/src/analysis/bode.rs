use rayon::prelude::*;

use super::{check_frequencies, fundamental, magnitude, phase_vs_sine, AnalysisError, SeaSystem};
use crate::control::{Command, Episode};
use crate::plant::LoadModel;
use crate::waveform::Waveform;

/// -3 dB amplitude ratio.
pub const HALF_POWER_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodeOptions {
    pub warmup_cycles: u32,
    pub measure_cycles: u32,
    /// A point is unstable when its last measured cycle is this many times
    /// larger than its first.
    pub growth_limit: f64,
}

impl Default for BodeOptions {
    fn default() -> Self {
        Self {
            warmup_cycles: 5,
            measure_cycles: 10,
            growth_limit: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqResponsePoint {
    pub frequency: f64,
    /// Fundamental of the true spring force over the commanded amplitude.
    pub amplitude_ratio: f64,
    /// Degrees, unwrapped along the sweep so that it stays in (−360, 360).
    pub phase: f64,
    pub unstable: bool,
}

/// Sine force tracking against a locked load, one independent episode per
/// frequency. Points are computed in parallel; the output does not depend on
/// scheduling.
pub fn bode_force_tracking(
    system: &SeaSystem,
    amplitude: f64,
    frequencies: &[f64],
    opts: &BodeOptions,
) -> Result<Vec<FreqResponsePoint>, AnalysisError> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(AnalysisError::NonPositiveAmplitude(amplitude));
    }
    check_frequencies(frequencies)?;
    if opts.measure_cycles < 2 {
        return Err(AnalysisError::Control(crate::control::ControlError::InvalidConfig(
            "need at least two measured cycles".into(),
        )));
    }
    let mut points = frequencies
        .par_iter()
        .map(|&f| bode_point(system, amplitude, f, opts))
        .collect::<Result<Vec<_>, _>>()?;
    unwrap_phase(&mut points);
    Ok(points)
}

fn bode_point(
    system: &SeaSystem,
    amplitude: f64,
    frequency: f64,
    opts: &BodeOptions,
) -> Result<FreqResponsePoint, AnalysisError> {
    let cycles = opts.warmup_cycles + opts.measure_cycles;
    let episode = Episode::new(
        system.plant,
        LoadModel::Locked,
        system.controller,
        Command::Force(Waveform::sine(amplitude, frequency)),
    )
    .duration(cycles as f64 / frequency)
    .dt(system.dt)
    .seed(system.seed);

    let start = opts.warmup_cycles as f64 / frequency;
    let end = cycles as f64 / frequency;
    let mut times = Vec::new();
    let mut forces = Vec::new();
    let mut peaks = vec![0.0_f64; opts.measure_cycles as usize];
    let half = 0.5 * system.dt;
    let outcome = episode.run_with(|r| {
        // Half-open window [start, end) covers an integer number of cycles.
        if r.time >= start - half && r.time < end - half {
            times.push(r.time);
            forces.push(r.force_true);
            let idx = (((r.time - start) * frequency + 1e-9).floor().max(0.0) as usize).min(peaks.len() - 1);
            peaks[idx] = peaks[idx].max(r.force_true.abs());
        }
    });

    let unstable_point = FreqResponsePoint {
        frequency,
        amplitude_ratio: f64::NAN,
        phase: f64::NAN,
        unstable: true,
    };
    match outcome {
        Ok(()) => {}
        Err(crate::control::ControlError::Plant(_)) | Err(crate::control::ControlError::NonFinite(_)) => {
            return Ok(unstable_point)
        }
        Err(e) => return Err(e.into()),
    }
    if forces.iter().any(|f| !f.is_finite()) {
        return Ok(unstable_point);
    }
    let first = peaks[0];
    let last = peaks[peaks.len() - 1];
    let grew = last > opts.growth_limit * first.max(f64::MIN_POSITIVE);

    let c = fundamental(&times, &forces, frequency);
    Ok(FreqResponsePoint {
        frequency,
        amplitude_ratio: magnitude(c) / amplitude,
        phase: phase_vs_sine(c),
        unstable: grew,
    })
}

/// Removes 360° jumps so phase lag accumulates across the sweep.
fn unwrap_phase(points: &mut [FreqResponsePoint]) {
    let mut prev: Option<f64> = None;
    for p in points.iter_mut() {
        if !p.phase.is_finite() {
            continue;
        }
        if let Some(q) = prev {
            while p.phase - q > 180.0 && p.phase - 360.0 > -360.0 {
                p.phase -= 360.0;
            }
            while q - p.phase > 180.0 && p.phase + 360.0 < 360.0 {
                p.phase += 360.0;
            }
        }
        prev = Some(p.phase);
    }
}

/// Bandwidth estimate; `censored` means no −3 dB crossing was found and
/// `frequency` is the highest tested frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidth {
    pub frequency: f64,
    pub censored: bool,
}

/// First downward crossing of the −3 dB ratio, interpolated linearly in the
/// ratio against log-frequency.
pub fn bandwidth_from_points(points: &[FreqResponsePoint]) -> Result<Bandwidth, AnalysisError> {
    let first = points.first().ok_or(AnalysisError::NoFrequencies)?;
    if points.windows(2).any(|w| w[1].frequency <= w[0].frequency) {
        return Err(AnalysisError::BadFrequencies);
    }
    if first.unstable {
        return Err(AnalysisError::UnstablePoint(first.frequency));
    }
    if !(first.amplitude_ratio > HALF_POWER_RATIO) {
        return Err(AnalysisError::StartsBelowThreshold(first.amplitude_ratio));
    }
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.unstable {
            return Err(AnalysisError::UnstablePoint(b.frequency));
        }
        if b.amplitude_ratio <= HALF_POWER_RATIO {
            let s = (a.amplitude_ratio - HALF_POWER_RATIO) / (a.amplitude_ratio - b.amplitude_ratio);
            let lf = a.frequency.log10() + s * (b.frequency.log10() - a.frequency.log10());
            return Ok(Bandwidth {
                frequency: 10f64.powf(lf),
                censored: false,
            });
        }
    }
    Ok(Bandwidth {
        frequency: points[points.len() - 1].frequency,
        censored: true,
    })
}

/// `n` log-spaced frequencies from `lo` to `hi` inclusive.
pub fn log_frequencies(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}
