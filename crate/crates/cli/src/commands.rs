//! One function per subcommand. Each returns its text output and the CSV
//! artifacts it produced; writing files is left to the caller so output is
//! serialized in one place.

use sea_core::analysis::{
    bandwidth_from_points, bode_force_tracking, chatter_experiment, energy_audit, harmonic_episode, log_frequencies,
    output_impedance, shock_test, smallest_resolvable_force, AnalysisError, BodeOptions, ChatterOptions,
    HarmonicEpisode, ImpedanceOptions, ResolutionOptions, SeaSystem, ShockOptions,
};
use sea_core::catalog::{builtin_catalog, consistency_report, derive_spring_stiffness, ActuatorSpec, CatalogError};
use sea_core::stance::StanceError;
use sea_core::units::{Unit, UnitError, NEWTONS_PER_POUND_FORCE};
use sea_core::{distribute_forces, ControlError, Episode};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{bode_csv, catalog_csv, impedance_csv, sig, stance_csv, table};
use crate::report::{run_report, ReportError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Stance(#[from] StanceError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub text: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub exit_code: i32,
}

impl Outcome {
    fn new(text: String) -> Self {
        Self {
            text,
            ..Self::default()
        }
    }

    fn file(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.files.push((name.to_string(), bytes));
        self
    }
}

/// Everything a subcommand needs: the effective configuration, the actuator
/// it was built from and the noise seed.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub spec: ActuatorSpec,
    pub seed: u64,
}

impl Context {
    pub fn new(spec: ActuatorSpec, config_text: Option<&str>, seed: u64) -> Result<Self, ConfigError> {
        let mut config = RunConfig::for_actuator(&spec);
        if let Some(text) = config_text {
            config.apply(text)?;
        }
        Ok(Self { config, spec, seed })
    }

    fn system(&self) -> SeaSystem {
        SeaSystem {
            plant: self.config.plant,
            controller: self.config.controller,
            dt: self.config.experiment.dt,
            seed: self.seed,
        }
    }

    fn frequencies(&self) -> Vec<f64> {
        let e = &self.config.experiment;
        log_frequencies(e.freq_min, e.freq_max, e.points)
    }
}

pub fn catalog() -> Result<Outcome, CommandError> {
    let specs = builtin_catalog();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for s in &specs {
        let k = derive_spring_stiffness(s, None, Unit::PoundForcePerInch)?.stiffness.magnitude;
        let lbf = |v: sea_core::UnitValue| v.in_unit(Unit::PoundForce).map(sig);
        rows.push(vec![
            s.name.to_string(),
            format!("{:?}", s.actuation_kind).to_lowercase(),
            lbf(s.continuous_force)?,
            s.intermittent_force.map(lbf).transpose()?.unwrap_or_else(|| "-".into()),
            sig(s.max_speed.in_unit(Unit::InchPerSecond)?),
            sig(s.small_force_bandwidth.si()),
            sig(s.large_force_bandwidth.si()),
            sig(k),
        ]);
        for c in consistency_report(s) {
            checks.push((s.name, c));
        }
    }
    let mut text = table(
        &[
            "name",
            "kind",
            "cont_lbf",
            "int_lbf",
            "speed_in_s",
            "small_bw_hz",
            "large_bw_hz",
            "k_lbf_in",
        ],
        &rows,
    );
    text.push('\n');
    let check_rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(n, c)| {
            vec![
                n.to_string(),
                c.name.to_string(),
                format!("{} {}", sig(c.derived), c.unit),
                format!("{} {}", sig(c.listed), c.unit),
                format!("{}%", sig(100.0 * c.relative_error)),
            ]
        })
        .collect();
    text += &table(&["name", "quantity", "derived", "listed", "rel_error"], &check_rows);
    Ok(Outcome::new(text).file("catalog.csv", catalog_csv(&checks)?))
}

pub fn simulate(ctx: &Context) -> Result<Outcome, CommandError> {
    let cfg = &ctx.config;
    let traj = Episode::new(cfg.plant, cfg.load.model(), cfg.controller, cfg.command())
        .duration(cfg.command.duration)
        .dt(cfg.experiment.dt)
        .seed(ctx.seed)
        .run()?;
    let last = traj.last().expect("episodes log at least the initial state");
    let peak = traj.records.iter().map(|r| r.force_true.abs()).fold(0.0, f64::max);
    let text = format!(
        "seed: {}\nsamples: {}\nfinal time: {} s\nfinal commanded force: {} N\nfinal measured force: {} N\nfinal true force: {} N\npeak |true force|: {} N\n",
        ctx.seed,
        traj.len(),
        sig(last.time),
        sig(last.cmd),
        sig(last.force_meas),
        sig(last.force_true),
        sig(peak),
    );
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    Ok(Outcome::new(text).file("trajectory.csv", csv))
}

pub fn bode(ctx: &Context) -> Result<Outcome, CommandError> {
    let amplitude = ctx.config.experiment.amplitude;
    let pts = bode_force_tracking(&ctx.system(), amplitude, &ctx.frequencies(), &BodeOptions::default())?;
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|p| {
            vec![
                sig(p.frequency),
                sig(p.amplitude_ratio),
                sig(p.phase),
                if p.unstable { "unstable" } else { "" }.into(),
            ]
        })
        .collect();
    let mut text = format!("seed: {}\namplitude: {} N\n\n", ctx.seed, sig(amplitude));
    text += &table(&["frequency_hz", "ratio", "phase_deg", "flag"], &rows);
    match bandwidth_from_points(&pts) {
        Ok(bw) if bw.censored => text += &format!("\nbandwidth: > {} Hz (no -3 dB crossing)\n", sig(bw.frequency)),
        Ok(bw) => text += &format!("\nbandwidth: {} Hz\n", sig(bw.frequency)),
        Err(e) => text += &format!("\nbandwidth: unavailable ({e})\n"),
    }
    Ok(Outcome::new(text).file("bode.csv", bode_csv(&pts)?))
}

pub fn impedance(ctx: &Context) -> Result<Outcome, CommandError> {
    let amplitude = ctx.config.experiment.impedance_amplitude;
    let pts = output_impedance(&ctx.system(), amplitude, &ctx.frequencies(), &ImpedanceOptions::default())?;
    let k = ctx.config.plant.spring_stiffness;
    let rows: Vec<Vec<String>> = pts
        .iter()
        .map(|p| {
            vec![
                sig(p.frequency),
                sig(p.impedance_magnitude),
                sig(p.impedance_magnitude / k),
            ]
        })
        .collect();
    let mut text = format!(
        "seed: {}\nmotion amplitude: {} m\nspring stiffness K: {} N/m\n\n",
        ctx.seed,
        sig(amplitude),
        sig(k)
    );
    text += &table(&["frequency_hz", "impedance_N_per_m", "over_k"], &rows);
    Ok(Outcome::new(text).file("impedance.csv", impedance_csv(&pts)?))
}

pub fn resolve(ctx: &Context) -> Result<Outcome, CommandError> {
    let e = &ctx.config.experiment;
    let r = smallest_resolvable_force(
        &ctx.system(),
        &ResolutionOptions {
            grid: e.resolution_grid,
            upper: e.resolution_upper,
            ..ResolutionOptions::default()
        },
    )?;
    let text = if r.censored {
        format!(
            "seed: {}\nsmallest resolvable force: none up to {} N ({} steps tried)\n",
            ctx.seed,
            sig(r.threshold),
            r.evaluations
        )
    } else {
        format!(
            "seed: {}\nsmallest resolvable force: {} N ({} lbf, {} steps tried)\n",
            ctx.seed,
            sig(r.threshold),
            sig(r.threshold / NEWTONS_PER_POUND_FORCE),
            r.evaluations
        )
    };
    Ok(Outcome::new(text))
}

pub fn chatter(ctx: &Context) -> Result<Outcome, CommandError> {
    let e = &ctx.config.experiment;
    let opts = ChatterOptions {
        command: e.chatter_command,
        contact_stiffness: e.contact_stiffness,
        ..ChatterOptions::default()
    };
    let sys = ctx.system();
    let mut text = format!("seed: {}\n\n", ctx.seed);
    for m in [1.0, e.multiplier] {
        text += &chatter_experiment(&sys, m, &opts)?.report().to_string();
        text.push('\n');
    }
    Ok(Outcome::new(text))
}

pub fn shock(ctx: &Context) -> Result<Outcome, CommandError> {
    let e = &ctx.config.experiment;
    let r = shock_test(
        &ctx.system(),
        &ShockOptions {
            impact_speed: e.impact_speed,
            impact_mass: e.impact_mass,
            rigid_multiplier: e.multiplier,
            ..ShockOptions::default()
        },
    )?;
    Ok(Outcome::new(format!("seed: {}\n\n{}", ctx.seed, r.report())))
}

pub fn energy(ctx: &Context) -> Result<Outcome, CommandError> {
    let ep = HarmonicEpisode::default();
    let traj = harmonic_episode(&ctx.system(), &ep)?;
    let audit = energy_audit(&traj, &ctx.config.plant, Some((ep.frequency, 4)))?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    Ok(Outcome::new(format!("seed: {}\n\n{}", ctx.seed, audit.report())).file("energy_trajectory.csv", csv))
}

pub fn stance(ctx: &Context) -> Result<Outcome, CommandError> {
    let problem = &ctx.config.stance;
    let sol = distribute_forces(problem)?;
    let normals = sol.normal_components(problem);
    let rows: Vec<Vec<String>> = sol
        .forces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let tangential = (f - problem.feet[i].normal * normals[i]).norm();
            vec![
                i.to_string(),
                sig(f.x),
                sig(f.y),
                sig(f.z),
                sig(normals[i]),
                sig(tangential),
            ]
        })
        .collect();
    let mut text = table(
        &["foot_index", "fx", "fy", "fz", "normal_component", "tangential_magnitude"],
        &rows,
    );
    let r = sol.residual_wrench;
    text += &format!(
        "\nresidual force: ({}, {}, {}) N\nresidual moment: ({}, {}, {}) N*m\nobjective: {} N^2\niterations: {}\n",
        sig(r[0]),
        sig(r[1]),
        sig(r[2]),
        sig(r[3]),
        sig(r[4]),
        sig(r[5]),
        sig(sol.objective_value),
        sol.iterations
    );
    Ok(Outcome::new(text).file("stance.csv", stance_csv(problem, &sol)?))
}

pub fn report(ctx: &Context) -> Result<Outcome, CommandError> {
    let report = run_report(&ctx.config, &ctx.spec, ctx.seed)?;
    let mut out = Outcome::new(report.render());
    out.exit_code = report.exit_code();
    out.files = report.artifacts()?;
    out.files.push(("config.txt".into(), ctx.config.emit().into_bytes()));
    Ok(out)
}
