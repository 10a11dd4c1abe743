//! Full measured-vs-datasheet comparison for one catalog actuator.

use std::fmt::Write as _;

use sea_core::analysis::{
    bandwidth_from_points, bode_force_tracking, chatter_experiment, energy_audit, harmonic_episode, log_frequencies,
    output_impedance, shock_test, smallest_resolvable_force, AnalysisError, BodeOptions, ChatterOptions,
    ExperimentReport, FreqResponsePoint, HarmonicEpisode, ImpedanceOptions, ImpedancePoint, ResolutionOptions,
    SeaSystem, ShockOptions,
};
use sea_core::catalog::{consistency_report, derive_spring_stiffness, ActuatorSpec, CatalogError};
use sea_core::defaults::SMALL_FORCE_FRACTION;
use sea_core::units::{Unit, NEWTONS_PER_POUND_FORCE};
use thiserror::Error;

use crate::config::RunConfig;
use crate::output::{bode_csv, impedance_csv, sig, sig_trim, table};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Where a target comes from: the published datasheet, or a relation this
/// toolkit derives and checks on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Paper,
    Derived,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Paper => "[PAPER]",
            Source::Derived => "[DERIVED]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Fraction of the target.
    Relative(f64),
    /// Same unit as the target.
    Absolute(f64),
}

/// A target value with its acceptance window.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRecord {
    pub metric: String,
    pub value: f64,
    pub unit: &'static str,
    pub tolerance: Tolerance,
    pub source: Source,
}

impl GoldenRecord {
    pub fn new(metric: &str, value: f64, unit: &'static str, tolerance: Tolerance, source: Source) -> Self {
        let width = match tolerance {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        };
        assert!(width > 0.0, "tolerance must be positive for {metric}");
        Self {
            metric: metric.to_string(),
            value,
            unit,
            tolerance,
            source,
        }
    }

    /// Inclusive acceptance interval.
    pub fn window(&self) -> (f64, f64) {
        match self.tolerance {
            Tolerance::Relative(t) => {
                let d = t * self.value.abs();
                (self.value - d, self.value + d)
            }
            Tolerance::Absolute(t) => (self.value - t, self.value + t),
        }
    }

    pub fn passes(&self, measured: f64) -> bool {
        let (lo, hi) = self.window();
        measured.is_finite() && measured >= lo && measured <= hi
    }

    fn tolerance_text(&self) -> String {
        match self.tolerance {
            Tolerance::Relative(t) => format!("±{}%", sig_trim(t * 100.0)),
            Tolerance::Absolute(t) => format!("±{}", sig_trim(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub golden: GoldenRecord,
    pub measured: f64,
}

impl ReportRow {
    pub fn pass(&self) -> bool {
        self.golden.passes(self.measured)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub actuator: String,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub small_force_sweep: Vec<FreqResponsePoint>,
    pub large_force_sweep: Vec<FreqResponsePoint>,
    pub impedance: Vec<ImpedancePoint>,
}

impl Report {
    pub fn row(&self, metric: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.golden.metric == metric)
    }

    /// Nonzero iff a datasheet-sourced target is missed.
    pub fn exit_code(&self) -> i32 {
        let failed = self.rows.iter().any(|r| r.golden.source == Source::Paper && !r.pass());
        i32::from(failed)
    }

    pub fn render(&self) -> String {
        let header = ["metric", "measured", "target", "tolerance", "verdict", "source"];
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let unit = |v: f64| {
                    if r.golden.unit.is_empty() {
                        sig(v)
                    } else {
                        format!("{} {}", sig(v), r.golden.unit)
                    }
                };
                vec![
                    r.golden.metric.clone(),
                    unit(r.measured),
                    unit(r.golden.value),
                    r.golden.tolerance_text(),
                    if r.pass() { "pass" } else { "FAIL" }.to_string(),
                    r.golden.source.tag().to_string(),
                ]
            })
            .collect();
        let paper_fail = self.rows.iter().filter(|r| r.golden.source == Source::Paper && !r.pass()).count();
        let fail = self.rows.iter().filter(|r| !r.pass()).count();
        let mut out = format!("actuator: {}\nseed: {}\n\n", self.actuator, self.seed);
        out += &table(&header, &cells);
        let _ = writeln!(
            out,
            "\n{} checks, {fail} failed ({paper_fail} datasheet targets missed)",
            self.rows.len()
        );
        out
    }

    pub fn csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "unit", "measured", "target", "lower", "upper", "source", "verdict"])?;
        for r in &self.rows {
            let (lo, hi) = r.golden.window();
            w.write_record([
                r.golden.metric.clone(),
                r.golden.unit.to_string(),
                r.measured.to_string(),
                r.golden.value.to_string(),
                lo.to_string(),
                hi.to_string(),
                r.golden.source.tag().to_string(),
                if r.pass() { "pass" } else { "fail" }.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }

    /// The same table as a generic experiment report.
    pub fn to_experiment_report(&self) -> ExperimentReport {
        let mut r = ExperimentReport::new(format!("report {}", self.actuator));
        for row in &self.rows {
            r = r.metric(&row.golden.metric, row.measured, row.golden.unit);
            r = r.verdict(&row.golden.metric, row.pass());
        }
        r
    }

    pub fn artifacts(&self) -> Result<Vec<(String, Vec<u8>)>, ReportError> {
        Ok(vec![
            ("report.csv".into(), self.csv()?),
            ("bode_small.csv".into(), bode_csv(&self.small_force_sweep)?),
            ("bode_large.csv".into(), bode_csv(&self.large_force_sweep)?),
            ("impedance.csv".into(), impedance_csv(&self.impedance)?),
        ])
    }
}

/// Multiples of the small-force bandwidth at which the spring-like impedance
/// asymptote is checked.
pub const ASYMPTOTE_MULTIPLES: [f64; 3] = [5.0, 6.0, 7.0];
/// Low frequency at which the closed loop should be easy to back-drive, Hz.
pub const BACKDRIVE_FREQUENCY: f64 = 0.5;
/// Quasi-static tracking check frequency, Hz.
pub const QUASI_STATIC_FREQUENCY: f64 = 0.1;
/// Quasi-static tracking amplitude, N (10 lbf). The small-force amplitude of
/// the lighter actuators is only a few sensor counts, where quantization
/// alone costs several percent of tracking.
pub const QUASI_STATIC_AMPLITUDE: f64 = 10.0 * NEWTONS_PER_POUND_FORCE;

fn bandwidth(system: &SeaSystem, amplitude: f64, freqs: &[f64]) -> Result<(f64, Vec<FreqResponsePoint>), ReportError> {
    let pts = bode_force_tracking(system, amplitude, freqs, &BodeOptions::default())?;
    let bw = bandwidth_from_points(&pts)?;
    Ok((bw.frequency, pts))
}

/// Run every experiment against `config` and compare with `spec`.
pub fn run_report(config: &RunConfig, spec: &ActuatorSpec, seed: u64) -> Result<Report, ReportError> {
    use Source::{Derived, Paper};
    use Tolerance::{Absolute, Relative};

    let system = SeaSystem {
        plant: config.plant,
        controller: config.controller,
        dt: config.experiment.dt,
        seed,
    };
    let k = config.plant.spring_stiffness;
    let mut rows = Vec::new();
    let mut push = |g: GoldenRecord, measured: f64| rows.push(ReportRow { golden: g, measured });

    for c in consistency_report(spec) {
        push(GoldenRecord::new(c.name, c.listed, c.unit, Relative(0.05), Paper), c.derived);
    }
    let derived_k = derive_spring_stiffness(spec, None, Unit::PoundForcePerInch)?.stiffness.magnitude;
    let k_lbf_in = k / Unit::PoundForcePerInch.to_si_factor();
    push(
        GoldenRecord::new("spring_stiffness", derived_k, "lbf/in", Relative(1e-6), Derived),
        k_lbf_in,
    );

    let exp = &config.experiment;
    let freqs = log_frequencies(exp.freq_min, exp.freq_max, exp.points);
    let small_amp = SMALL_FORCE_FRACTION * spec.continuous_force.si();
    let large_amp = spec.peak_force().si();
    let (small_bw, small_pts) = bandwidth(&system, small_amp, &freqs)?;
    let (large_bw, large_pts) = bandwidth(&system, large_amp, &freqs)?;
    push(
        GoldenRecord::new(
            "small_force_bandwidth",
            spec.small_force_bandwidth.si(),
            "Hz",
            Relative(0.2),
            Paper,
        ),
        small_bw,
    );
    push(
        GoldenRecord::new(
            "large_force_bandwidth",
            spec.large_force_bandwidth.si(),
            "Hz",
            Relative(0.3),
            Paper,
        ),
        large_bw,
    );
    let law = k * config.plant.max_speed / (2.0 * std::f64::consts::PI * large_amp);
    push(
        GoldenRecord::new("large_force_bandwidth_vs_saturation_law", law, "Hz", Relative(0.3), Derived),
        large_bw,
    );
    let qs = bode_force_tracking(&system, QUASI_STATIC_AMPLITUDE, &[QUASI_STATIC_FREQUENCY], &BodeOptions::default())?;
    push(
        GoldenRecord::new("tracking_ratio_at_0.1_hz", 1.0, "", Absolute(0.02), Derived),
        qs[0].amplitude_ratio,
    );

    let imp_opts = ImpedanceOptions::default();
    let low = output_impedance(&system, exp.impedance_amplitude, &[BACKDRIVE_FREQUENCY], &imp_opts)?;
    push(
        GoldenRecord::new("impedance_at_0.5_hz_over_k", 0.05, "", Absolute(0.05), Derived),
        low[0].impedance_magnitude / k,
    );
    let high_freqs: Vec<f64> = ASYMPTOTE_MULTIPLES.iter().map(|m| m * small_bw).collect();
    let sea_z = output_impedance(&system, exp.impedance_amplitude, &high_freqs, &imp_opts)?;
    let rigid_z = output_impedance(
        &system.stiffened(exp.multiplier),
        exp.impedance_amplitude,
        &high_freqs,
        &imp_opts,
    )?;
    for ((m, s), r) in ASYMPTOTE_MULTIPLES.iter().zip(&sea_z).zip(&rigid_z) {
        push(
            GoldenRecord::new(&format!("impedance_at_{m}x_bandwidth_over_k"), 1.0, "", Absolute(0.5), Derived),
            s.impedance_magnitude / k,
        );
        // At most a tenth of the stiff-sensor impedance: the window [0, 0.1].
        push(
            GoldenRecord::new(
                &format!("impedance_at_{m}x_bandwidth_over_stiff"),
                0.05,
                "",
                Absolute(0.05),
                Derived,
            ),
            s.impedance_magnitude / r.impedance_magnitude,
        );
    }
    let mut impedance = low;
    impedance.extend(sea_z);

    let res = smallest_resolvable_force(
        &system,
        &ResolutionOptions {
            grid: exp.resolution_grid,
            upper: exp.resolution_upper,
            ..ResolutionOptions::default()
        },
    )?;
    push(
        GoldenRecord::new("smallest_resolvable_force", 1.0, "lbf", Absolute(0.5), Paper),
        if res.censored {
            f64::INFINITY
        } else {
            res.threshold / NEWTONS_PER_POUND_FORCE
        },
    );

    let chatter_opts = ChatterOptions {
        command: exp.chatter_command,
        contact_stiffness: exp.contact_stiffness,
        ..ChatterOptions::default()
    };
    let soft = chatter_experiment(&system, 1.0, &chatter_opts)?;
    let stiff = chatter_experiment(&system, exp.multiplier, &chatter_opts)?;
    push(
        GoldenRecord::new("contact_overshoot_x1", 0.25, "", Absolute(0.25), Derived),
        soft.overshoot,
    );
    push(
        GoldenRecord::new("contact_chatter_x1", 0.0, "", Absolute(0.5), Derived),
        f64::from(u8::from(soft.chatter)),
    );
    push(
        GoldenRecord::new("contact_chatter_stiff", 1.0, "", Absolute(0.5), Derived),
        f64::from(u8::from(stiff.chatter)),
    );

    let shock = shock_test(
        &system,
        &ShockOptions {
            impact_speed: exp.impact_speed,
            impact_mass: exp.impact_mass,
            rigid_multiplier: exp.multiplier,
            ..ShockOptions::default()
        },
    )?;
    push(
        GoldenRecord::new("shock_peak_ratio", exp.multiplier.sqrt(), "", Relative(0.2), Derived),
        shock.ratio,
    );
    push(
        GoldenRecord::new("shock_elastic_peak", shock.elastic_closed_form, "N", Relative(0.01), Derived),
        shock.elastic_peak,
    );

    let ep = HarmonicEpisode::default();
    let traj = harmonic_episode(&system, &ep)?;
    let audit = energy_audit(&traj, &config.plant, Some((ep.frequency, 4)))?;
    push(
        GoldenRecord::new("energy_relative_closure", 0.0, "", Absolute(0.01), Derived),
        audit.relative_closure,
    );

    Ok(Report {
        actuator: spec.name.to_string(),
        seed,
        rows,
        small_force_sweep: small_pts,
        large_force_sweep: large_pts,
        impedance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_window() {
        let g = GoldenRecord::new("bw", 35.0, "Hz", Tolerance::Relative(0.2), Source::Paper);
        assert_eq!(g.window(), (28.0, 42.0));
        assert!(g.passes(28.0) && g.passes(42.0));
        assert!(!g.passes(27.9) && !g.passes(f64::NAN));
    }

    #[test]
    #[should_panic]
    fn zero_tolerance_rejected() {
        GoldenRecord::new("x", 1.0, "", Tolerance::Absolute(0.0), Source::Derived);
    }

    #[test]
    fn exit_code_only_counts_paper_rows() {
        let row = |source, measured| ReportRow {
            golden: GoldenRecord::new("m", 1.0, "", Tolerance::Absolute(0.1), source),
            measured,
        };
        let mut r = Report {
            actuator: "x".into(),
            seed: 0,
            rows: vec![row(Source::Derived, 5.0), row(Source::Paper, 1.0)],
            small_force_sweep: vec![],
            large_force_sweep: vec![],
            impedance: vec![],
        };
        assert_eq!(r.exit_code(), 0);
        r.rows.push(row(Source::Paper, 2.0));
        assert_eq!(r.exit_code(), 1);
    }
}
