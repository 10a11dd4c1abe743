//! CSV writers and number formatting shared by the subcommands.

use sea_core::analysis::{FreqResponsePoint, ImpedancePoint};
use sea_core::catalog::ConsistencyCheck;
use sea_core::StanceProblem;
use sea_core::StanceSolution;

/// Four significant digits, scientific outside `[1e-4, 1e6)`.
pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mut mag = v.abs().log10().floor() as i32;
    // Rounding to four digits can carry into the next decade (9.99999 -> 10.00).
    let scale = 10f64.powi(3 - mag);
    if (v.abs() * scale).round() >= 1e4 {
        mag += 1;
    }
    if !(-4..6).contains(&mag) {
        return format!("{v:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

/// [`sig`] without trailing zeros after the decimal point.
pub fn sig_trim(v: f64) -> String {
    let s = sig(v);
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, csv::Error> {
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

pub fn bode_csv(points: &[FreqResponsePoint]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["frequency_hz", "ratio", "phase_deg"])?;
    for p in points {
        w.write_record([p.frequency.to_string(), p.amplitude_ratio.to_string(), p.phase.to_string()])?;
    }
    finish(w)
}

pub fn impedance_csv(points: &[ImpedancePoint]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["frequency_hz", "impedance_N_per_m"])?;
    for p in points {
        w.write_record([p.frequency.to_string(), p.impedance_magnitude.to_string()])?;
    }
    finish(w)
}

pub fn catalog_csv(rows: &[(&str, ConsistencyCheck)]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "quantity", "derived", "listed", "rel_error"])?;
    for (name, c) in rows {
        w.write_record([
            name.to_string(),
            c.name.to_string(),
            c.derived.to_string(),
            c.listed.to_string(),
            c.relative_error.to_string(),
        ])?;
    }
    finish(w)
}

pub fn stance_csv(problem: &StanceProblem, solution: &StanceSolution) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["foot_index", "fx", "fy", "fz", "normal_component", "tangential_magnitude"])?;
    let normals = solution.normal_components(problem);
    for (i, f) in solution.forces.iter().enumerate() {
        let tangential = (f - problem.feet[i].normal * normals[i]).norm();
        w.write_record([
            i.to_string(),
            f.x.to_string(),
            f.y.to_string(),
            f.z.to_string(),
            normals[i].to_string(),
            tangential.to_string(),
        ])?;
    }
    finish(w)
}

/// Left-aligned text table with two-space gutters.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let fmt = |row: Vec<String>| {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = fmt(header.iter().map(|s| s.to_string()).collect());
    out += &fmt(widths.iter().map(|w| "-".repeat(*w)).collect());
    for row in rows {
        out += &fmt(row.clone());
    }
    out
}
