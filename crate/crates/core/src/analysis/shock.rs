use super::{AnalysisError, ExperimentReport, SeaSystem};
use crate::control::{Command, ControllerConfig, Episode};
use crate::defaults::RIGID_PROXY_MULTIPLIER;
use crate::plant::{LoadModel, SimState};
use crate::waveform::Waveform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockOptions {
    pub impact_speed: f64,
    pub impact_mass: f64,
    pub rigid_multiplier: f64,
    pub duration: f64,
    /// Integration step; the stiff proxy needs a finer one than the default.
    pub dt: f64,
    /// Remove friction and spring damping so the closed form applies.
    pub frictionless: bool,
}

impl Default for ShockOptions {
    fn default() -> Self {
        Self {
            impact_speed: 1.0,
            impact_mass: 1.0,
            rigid_multiplier: RIGID_PROXY_MULTIPLIER,
            duration: 0.05,
            dt: 1e-5,
            frictionless: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockResult {
    pub elastic_peak: f64,
    pub rigid_peak: f64,
    pub ratio: f64,
    /// `v·sqrt(μ·K)` with μ the reduced mass of motor and impactor.
    pub elastic_closed_form: f64,
}

impl ShockResult {
    pub fn report(&self) -> ExperimentReport {
        ExperimentReport::new("shock")
            .metric("elastic_peak_force", self.elastic_peak, "N")
            .metric("rigid_peak_force", self.rigid_peak, "N")
            .metric("rigid_over_elastic", self.ratio, "1")
            .metric("elastic_closed_form", self.elastic_closed_form, "N")
    }
}

/// A free mass strikes the idle actuator output. The drive is passive (zero
/// gains): a shock is over before any real force loop could react.
pub fn shock_test(system: &SeaSystem, opts: &ShockOptions) -> Result<ShockResult, AnalysisError> {
    if !(opts.impact_mass > 0.0) {
        return Err(AnalysisError::NonPositiveAmplitude(opts.impact_mass));
    }
    if !(opts.rigid_multiplier >= 1.0) {
        return Err(AnalysisError::BadMultiplier(opts.rigid_multiplier));
    }
    let base = if opts.frictionless {
        system.plant.frictionless()
    } else {
        system.plant
    };
    let peak = |plant| -> Result<f64, AnalysisError> {
        let episode = Episode::new(
            plant,
            LoadModel::InertialLoad {
                load_mass: opts.impact_mass,
                external_force: Waveform::Zero,
            },
            ControllerConfig::passive(system.controller.sample_period),
            Command::Force(Waveform::Zero),
        )
        .duration(opts.duration)
        .dt(opts.dt)
        .seed(system.seed)
        .initial(SimState {
            v_l: -opts.impact_speed,
            ..SimState::default()
        });
        let mut p = 0.0_f64;
        episode.run_with(|r| p = p.max(r.force_true.abs()))?;
        Ok(p)
    };
    let elastic_peak = peak(base)?;
    let rigid_peak = peak(base.with_stiffness_multiplier(opts.rigid_multiplier))?;
    let mu = base.motor_mass * opts.impact_mass / (base.motor_mass + opts.impact_mass);
    Ok(ShockResult {
        elastic_peak,
        rigid_peak,
        ratio: if elastic_peak > 0.0 { rigid_peak / elastic_peak } else { f64::NAN },
        elastic_closed_form: opts.impact_speed.abs() * (mu * base.spring_stiffness).sqrt(),
    })
}
