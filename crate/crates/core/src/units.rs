//! Tagged physical quantities and exact unit conversions.
//!
//! Everything inside the dynamics core is SI. Imperial units only appear at
//! the catalog and configuration boundaries, and all conversion goes through
//! [`UnitValue::convert`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Meters per inch (exact by definition).
pub const METERS_PER_INCH: f64 = 0.0254;
/// Newtons per pound-force (exact by definition).
pub const NEWTONS_PER_POUND_FORCE: f64 = 4.4482216152605;
/// Kilograms per pound-mass (exact by definition).
pub const KILOGRAMS_PER_POUND_MASS: f64 = 0.45359237;
/// Watts per mechanical horsepower.
pub const WATTS_PER_HORSEPOWER: f64 = 745.6998715822702;
/// Inch-pound-force per second in one horsepower (550 ft·lbf/s).
pub const INCH_POUND_FORCE_PER_SECOND_PER_HORSEPOWER: f64 = 6600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Force,
    Length,
    Speed,
    Stiffness,
    Power,
    Frequency,
    Mass,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Force => "force",
            Dimension::Length => "length",
            Dimension::Speed => "speed",
            Dimension::Stiffness => "stiffness",
            Dimension::Power => "power",
            Dimension::Frequency => "frequency",
            Dimension::Mass => "mass",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Newton,
    PoundForce,
    Meter,
    Inch,
    MeterPerSecond,
    InchPerSecond,
    NewtonPerMeter,
    PoundForcePerInch,
    Watt,
    Horsepower,
    Hertz,
    Kilogram,
    PoundMass,
}

impl Unit {
    pub const ALL: [Unit; 13] = [
        Unit::Newton,
        Unit::PoundForce,
        Unit::Meter,
        Unit::Inch,
        Unit::MeterPerSecond,
        Unit::InchPerSecond,
        Unit::NewtonPerMeter,
        Unit::PoundForcePerInch,
        Unit::Watt,
        Unit::Horsepower,
        Unit::Hertz,
        Unit::Kilogram,
        Unit::PoundMass,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Newton | Unit::PoundForce => Dimension::Force,
            Unit::Meter | Unit::Inch => Dimension::Length,
            Unit::MeterPerSecond | Unit::InchPerSecond => Dimension::Speed,
            Unit::NewtonPerMeter | Unit::PoundForcePerInch => Dimension::Stiffness,
            Unit::Watt | Unit::Horsepower => Dimension::Power,
            Unit::Hertz => Dimension::Frequency,
            Unit::Kilogram | Unit::PoundMass => Dimension::Mass,
        }
    }

    /// Multiplier taking a magnitude in this unit to the SI unit of its dimension.
    pub fn to_si_factor(self) -> f64 {
        match self {
            Unit::Newton
            | Unit::Meter
            | Unit::MeterPerSecond
            | Unit::NewtonPerMeter
            | Unit::Watt
            | Unit::Hertz
            | Unit::Kilogram => 1.0,
            Unit::PoundForce => NEWTONS_PER_POUND_FORCE,
            Unit::Inch => METERS_PER_INCH,
            Unit::InchPerSecond => METERS_PER_INCH,
            Unit::PoundForcePerInch => NEWTONS_PER_POUND_FORCE / METERS_PER_INCH,
            Unit::Horsepower => WATTS_PER_HORSEPOWER,
            Unit::PoundMass => KILOGRAMS_PER_POUND_MASS,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Newton => "N",
            Unit::PoundForce => "lbf",
            Unit::Meter => "m",
            Unit::Inch => "in",
            Unit::MeterPerSecond => "m/s",
            Unit::InchPerSecond => "in/s",
            Unit::NewtonPerMeter => "N/m",
            Unit::PoundForcePerInch => "lbf/in",
            Unit::Watt => "W",
            Unit::Horsepower => "hp",
            Unit::Hertz => "Hz",
            Unit::Kilogram => "kg",
            Unit::PoundMass => "lb",
        }
    }

    pub fn si(dimension: Dimension) -> Unit {
        match dimension {
            Dimension::Force => Unit::Newton,
            Dimension::Length => Unit::Meter,
            Dimension::Speed => Unit::MeterPerSecond,
            Dimension::Stiffness => Unit::NewtonPerMeter,
            Dimension::Power => Unit::Watt,
            Dimension::Frequency => Unit::Hertz,
            Dimension::Mass => Unit::Kilogram,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    /// Accepts the canonical symbols plus a few common spellings, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unit = match s.trim().to_ascii_lowercase().as_str() {
            "n" | "newton" | "newtons" => Unit::Newton,
            "lbf" | "lbs" | "pound-force" => Unit::PoundForce,
            "m" | "meter" | "meters" => Unit::Meter,
            "in" | "inch" | "inches" => Unit::Inch,
            "m/s" => Unit::MeterPerSecond,
            "in/s" => Unit::InchPerSecond,
            "n/m" => Unit::NewtonPerMeter,
            "lbf/in" => Unit::PoundForcePerInch,
            "w" | "watt" | "watts" => Unit::Watt,
            "hp" => Unit::Horsepower,
            "hz" => Unit::Hertz,
            "kg" => Unit::Kilogram,
            "lb" | "lbm" => Unit::PoundMass,
            _ => return Err(UnitError::UnknownUnit(s.trim().to_string())),
        };
        Ok(unit)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("cannot convert {from} ({from_dim}) to {to} ({to_dim})")]
    DimensionMismatch {
        from: Unit,
        to: Unit,
        from_dim: Dimension,
        to_dim: Dimension,
    },
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
}

/// A magnitude tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitValue {
    pub magnitude: f64,
    pub unit: Unit,
}

impl UnitValue {
    pub const fn new(magnitude: f64, unit: Unit) -> Self {
        Self { magnitude, unit }
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    pub fn convert(self, target: Unit) -> Result<UnitValue, UnitError> {
        if self.unit.dimension() != target.dimension() {
            return Err(UnitError::DimensionMismatch {
                from: self.unit,
                to: target,
                from_dim: self.unit.dimension(),
                to_dim: target.dimension(),
            });
        }
        if self.unit == target {
            return Ok(self);
        }
        let si = self.magnitude * self.unit.to_si_factor();
        Ok(UnitValue::new(si / target.to_si_factor(), target))
    }

    /// Magnitude in the SI unit of this value's dimension.
    pub fn si(self) -> f64 {
        self.magnitude * self.unit.to_si_factor()
    }

    pub fn in_unit(self, target: Unit) -> Result<f64, UnitError> {
        self.convert(target).map(|v| v.magnitude)
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.magnitude, self.unit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pound_force_to_newton() {
        let v = UnitValue::new(100.0, Unit::PoundForce)
            .convert(Unit::Newton)
            .unwrap();
        assert!((v.magnitude - 444.82216152605).abs() < 1e-9);
        assert_eq!(v.unit, Unit::Newton);
    }

    #[test]
    fn inch_per_second_to_si() {
        let v = UnitValue::new(11.0, Unit::InchPerSecond)
            .convert(Unit::MeterPerSecond)
            .unwrap();
        assert!((v.magnitude - 0.2794).abs() < 1e-15);
    }

    #[test]
    fn identity_conversion_is_exact() {
        let v = UnitValue::new(0.22, Unit::Horsepower);
        assert_eq!(v.convert(Unit::Horsepower).unwrap(), v);
    }

    #[test]
    fn horsepower_matches_inch_pound_definition() {
        // 1 hp = 6600 in·lbf/s
        let w = INCH_POUND_FORCE_PER_SECOND_PER_HORSEPOWER * NEWTONS_PER_POUND_FORCE * METERS_PER_INCH;
        assert!((w - WATTS_PER_HORSEPOWER).abs() / WATTS_PER_HORSEPOWER < 1e-12);
    }

    #[test]
    fn dimension_mismatch_names_both_units() {
        let err = UnitValue::new(1.0, Unit::Newton)
            .convert(Unit::Inch)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("N") && msg.contains("in"), "{msg}");
        assert!(matches!(err, UnitError::DimensionMismatch { .. }));
    }

    #[test]
    fn parses_symbols() {
        assert_eq!("lbf/in".parse::<Unit>().unwrap(), Unit::PoundForcePerInch);
        assert_eq!("Hz".parse::<Unit>().unwrap(), Unit::Hertz);
        assert!("furlong".parse::<Unit>().is_err());
    }

    fn same_dimension_pair() -> impl Strategy<Value = (Unit, Unit)> {
        (0..Unit::ALL.len(), 0..Unit::ALL.len()).prop_filter_map("same dimension", |(a, b)| {
            let (a, b) = (Unit::ALL[a], Unit::ALL[b]);
            (a.dimension() == b.dimension()).then_some((a, b))
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless((a, b) in same_dimension_pair(), mag in -1e9f64..1e9) {
            let v = UnitValue::new(mag, a);
            let back = v.convert(b).unwrap().convert(a).unwrap();
            let scale = mag.abs().max(f64::MIN_POSITIVE);
            prop_assert!((back.magnitude - mag).abs() / scale < 1e-12);
        }
    }
}
