use std::f64::consts::PI;

use super::{AnalysisError, ExperimentReport, SeaSystem};
use crate::control::{Command, Episode, PositionLoopConfig, Trajectory};
use crate::plant::{LoadModel, PlantParams};
use crate::waveform::Waveform;

/// Harmonic position tracking of a load that resists its nominal motion, so
/// the actuator does net work every cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicEpisode {
    /// Load position amplitude, m.
    pub amplitude: f64,
    pub frequency: f64,
    pub cycles: u32,
    pub load_mass: f64,
    /// Resisting force per unit nominal load speed, N·s/m.
    pub load_damping: f64,
    pub position_loop: PositionLoopConfig,
}

impl Default for HarmonicEpisode {
    fn default() -> Self {
        Self {
            amplitude: 0.01,
            frequency: 1.0,
            cycles: 8,
            load_mass: 5.0,
            load_damping: 200.0,
            position_loop: PositionLoopConfig {
                kp_pos: 5e3,
                kd_pos: 220.0,
                force_limit: 1000.0,
            },
        }
    }
}

impl HarmonicEpisode {
    fn load(&self) -> LoadModel {
        // −c·ẋ_nominal with x_nominal = A·sin(ωt): a cosine opposing the motion.
        let w = 2.0 * PI * self.frequency;
        LoadModel::InertialLoad {
            load_mass: self.load_mass,
            external_force: Waveform::Sine {
                amplitude: self.load_damping * self.amplitude * w,
                frequency: self.frequency,
                phase: -PI / 2.0,
                offset: 0.0,
            },
        }
    }
}

pub fn harmonic_episode(system: &SeaSystem, ep: &HarmonicEpisode) -> Result<Trajectory, AnalysisError> {
    if !(ep.amplitude > 0.0) || !(ep.frequency > 0.0) {
        return Err(AnalysisError::NonPositiveAmplitude(ep.amplitude.min(ep.frequency)));
    }
    let episode = Episode::new(
        system.plant,
        ep.load(),
        system.controller,
        Command::Position {
            loop_cfg: ep.position_loop,
            target: Waveform::sine(ep.amplitude, ep.frequency),
        },
    )
    .duration(ep.cycles.max(1) as f64 / ep.frequency)
    .dt(system.dt)
    .seed(system.seed);
    Ok(episode.run()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAudit {
    pub motor_work: f64,
    pub load_work: f64,
    pub friction_loss: f64,
    pub damper_loss: f64,
    pub saturation_loss: f64,
    pub delta_stored: f64,
    /// `motor − load − dissipation − Δstored`, J.
    pub closure_error: f64,
    /// Closure over `max(|motor|, |load|)`; zero for an idle episode.
    pub relative_closure: f64,
    pub peak_stored_energy: f64,
    /// Motor and load work averaged over the trailing cycles, when requested.
    pub per_cycle_motor_work: Option<f64>,
    pub per_cycle_load_work: Option<f64>,
}

impl EnergyAudit {
    pub fn dissipation(&self) -> f64 {
        self.friction_loss + self.damper_loss + self.saturation_loss
    }

    pub fn work_ratio(&self) -> f64 {
        self.motor_work / self.load_work
    }

    pub fn report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new("energy")
            .metric("motor_work", self.motor_work, "J")
            .metric("load_work", self.load_work, "J")
            .metric("dissipation", self.dissipation(), "J")
            .metric("delta_stored", self.delta_stored, "J")
            .metric("closure_error", self.closure_error, "J")
            .metric("relative_closure", self.relative_closure, "1")
            .metric("peak_stored_energy", self.peak_stored_energy, "J")
            .metric("motor_over_load_work", self.work_ratio(), "1");
        if let (Some(m), Some(l)) = (self.per_cycle_motor_work, self.per_cycle_load_work) {
            r = r.metric("per_cycle_motor_work", m, "J").metric("per_cycle_load_work", l, "J");
        }
        r.verdict("closes_within_1pct", self.relative_closure < 0.01)
    }
}

/// Energy accounting over a logged episode. With `cycle` = `(frequency, n)`
/// the per-cycle work is averaged over the last `n` whole cycles.
pub fn energy_audit(
    trajectory: &Trajectory,
    params: &PlantParams,
    cycle: Option<(f64, u32)>,
) -> Result<EnergyAudit, AnalysisError> {
    let (first, last) = match (trajectory.records.first(), trajectory.records.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AnalysisError::EmptyTrajectory),
    };
    let d = |f: fn(&crate::plant::EnergyLedger) -> f64| f(&last.energy) - f(&first.energy);
    let motor_work = d(|e| e.effort_work);
    let load_work = d(|e| e.load_work);
    let friction_loss = d(|e| e.friction_loss);
    let damper_loss = d(|e| e.damper_loss);
    let saturation_loss = d(|e| e.saturation_loss);
    let delta_stored = last.stored_energy - first.stored_energy;
    let closure_error = motor_work - load_work - friction_loss - damper_loss - saturation_loss - delta_stored;
    let scale = motor_work.abs().max(load_work.abs());
    let relative_closure = if scale > 0.0 { closure_error.abs() / scale } else { 0.0 };
    let peak_stored_energy = trajectory
        .records
        .iter()
        .map(|r| 0.5 * params.spring_stiffness * r.deflection * r.deflection)
        .fold(0.0, f64::max);

    let (mut per_cycle_motor_work, mut per_cycle_load_work) = (None, None);
    if let Some((frequency, n)) = cycle {
        let period = 1.0 / frequency;
        let end = last.time;
        let start = end - n as f64 * period;
        if n > 0 && start >= first.time - 0.5 * trajectory.dt {
            let idx = (((start - first.time) / trajectory.dt).round() as usize).min(trajectory.len() - 1);
            let s = &trajectory.records[idx];
            per_cycle_motor_work = Some((last.energy.effort_work - s.energy.effort_work) / n as f64);
            per_cycle_load_work = Some((last.energy.load_work - s.energy.load_work) / n as f64);
        }
    }

    Ok(EnergyAudit {
        motor_work,
        load_work,
        friction_loss,
        damper_loss,
        saturation_loss,
        delta_stored,
        closure_error,
        relative_closure,
        peak_stored_energy,
        per_cycle_motor_work,
        per_cycle_load_work,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::TrajectoryRecord;
    use crate::defaults;
    use crate::plant::EnergyLedger;

    #[test]
    fn held_deflection_stores_half_k_d_squared() {
        let p = defaults::sea_23_23_plant();
        let d = 3e-3;
        let rec = TrajectoryRecord {
            time: 0.0,
            x_m: d,
            v_m: 0.0,
            x_l: 0.0,
            v_l: 0.0,
            deflection: d,
            force_true: p.spring_stiffness * d,
            force_meas: p.spring_stiffness * d,
            cmd: 0.0,
            effort: 0.0,
            stuck: true,
            energy: EnergyLedger::default(),
            stored_energy: 0.5 * p.spring_stiffness * d * d,
        };
        let t = Trajectory {
            dt: 1e-4,
            seed: 0,
            records: vec![rec],
        };
        let a = energy_audit(&t, &p, None).unwrap();
        assert_eq!(a.peak_stored_energy, 0.5 * p.spring_stiffness * d * d);
        assert_eq!(a.closure_error, 0.0);
    }

    #[test]
    fn empty_trajectory_rejected() {
        let t = Trajectory {
            dt: 1e-4,
            seed: 0,
            records: vec![],
        };
        assert!(energy_audit(&t, &defaults::sea_23_23_plant(), None).is_err());
    }
}
