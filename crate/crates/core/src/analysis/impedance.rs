use rayon::prelude::*;

use super::{check_frequencies, fundamental, magnitude, AnalysisError, SeaSystem};
use crate::control::{Command, ControlError, Episode};
use crate::plant::{self, LoadModel, SimState};
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImpedanceMode {
    /// Force loop running with a zero force command.
    #[default]
    ClosedLoop,
    /// Motor locked at zero by an ideal position servo; only the spring and
    /// its damper remain between the load and ground.
    MotorHeld,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceOptions {
    pub mode: ImpedanceMode,
    pub warmup_cycles: u32,
    pub measure_cycles: u32,
}

impl Default for ImpedanceOptions {
    fn default() -> Self {
        Self {
            mode: ImpedanceMode::ClosedLoop,
            warmup_cycles: 5,
            measure_cycles: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedancePoint {
    pub frequency: f64,
    /// Output force amplitude per unit load-motion amplitude, N/m. Infinite
    /// when the closed loop diverged at this frequency.
    pub impedance_magnitude: f64,
}

/// Moves the load sinusoidally with `amplitude` metres and measures the
/// fundamental of the spring force it feels.
pub fn output_impedance(
    system: &SeaSystem,
    amplitude: f64,
    frequencies: &[f64],
    opts: &ImpedanceOptions,
) -> Result<Vec<ImpedancePoint>, AnalysisError> {
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(AnalysisError::NonPositiveAmplitude(amplitude));
    }
    check_frequencies(frequencies)?;
    frequencies
        .par_iter()
        .map(|&f| match opts.mode {
            ImpedanceMode::ClosedLoop => closed_loop_point(system, amplitude, f, opts),
            ImpedanceMode::MotorHeld => Ok(motor_held_point(system, amplitude, f, opts)),
        })
        .collect()
}

fn window(opts: &ImpedanceOptions, frequency: f64) -> (f64, f64) {
    (
        opts.warmup_cycles as f64 / frequency,
        (opts.warmup_cycles + opts.measure_cycles) as f64 / frequency,
    )
}

fn closed_loop_point(
    system: &SeaSystem,
    amplitude: f64,
    frequency: f64,
    opts: &ImpedanceOptions,
) -> Result<ImpedancePoint, AnalysisError> {
    let motion = Waveform::sine(amplitude, frequency);
    let (start, end) = window(opts, frequency);
    let episode = Episode::new(
        system.plant,
        LoadModel::PrescribedMotion(motion),
        system.controller,
        Command::Force(Waveform::Zero),
    )
    .duration(end)
    .dt(system.dt)
    .seed(system.seed);
    let half = 0.5 * system.dt;
    let (mut times, mut forces) = (Vec::new(), Vec::new());
    let run = episode.run_with(|r| {
        if r.time >= start - half && r.time < end - half {
            times.push(r.time);
            forces.push(r.force_true);
        }
    });
    let diverged = ImpedancePoint {
        frequency,
        impedance_magnitude: f64::INFINITY,
    };
    match run {
        Ok(()) => {}
        Err(ControlError::Plant(_)) | Err(ControlError::NonFinite(_)) => return Ok(diverged),
        Err(e) => return Err(e.into()),
    }
    if forces.iter().any(|f| !f.is_finite()) {
        return Ok(diverged);
    }
    Ok(ImpedancePoint {
        frequency,
        impedance_magnitude: magnitude(fundamental(&times, &forces, frequency)) / amplitude,
    })
}

fn motor_held_point(system: &SeaSystem, amplitude: f64, frequency: f64, opts: &ImpedanceOptions) -> ImpedancePoint {
    let motion = Waveform::sine(amplitude, frequency);
    let (start, end) = window(opts, frequency);
    let n = ((end - start) / system.dt).round().max(1.0) as usize;
    let step = (end - start) / n as f64;
    let times: Vec<f64> = (0..n).map(|k| start + k as f64 * step).collect();
    let forces: Vec<f64> = times
        .iter()
        .map(|&t| {
            let s = SimState {
                time: t,
                x_l: motion.value(t),
                v_l: motion.rate(t),
                ..SimState::default()
            };
            plant::spring_force(&system.plant, &s)
        })
        .collect();
    ImpedancePoint {
        frequency,
        impedance_magnitude: magnitude(fundamental(&times, &forces, frequency)) / amplitude,
    }
}
