//! Built-in actuator datasheet entries, their internal consistency checks, and
//! the spring-stiffness design relation.

use std::f64::consts::PI;

use thiserror::Error;

use crate::units::{Dimension, Unit, UnitError, UnitValue, KILOGRAMS_PER_POUND_MASS, WATTS_PER_HORSEPOWER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActuationKind {
    Electric,
    Hydraulic,
}

/// One datasheet row set, in the units the datasheet lists.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorSpec {
    pub name: &'static str,
    pub weight: UnitValue,
    pub max_stroke: UnitValue,
    pub max_speed: UnitValue,
    pub continuous_force: UnitValue,
    pub continuous_power: UnitValue,
    pub intermittent_force: Option<UnitValue>,
    pub intermittent_power: Option<UnitValue>,
    /// Listed continuous power-to-weight, hp/lb.
    pub continuous_power_to_weight: f64,
    /// Listed intermittent power-to-weight, hp/lb.
    pub intermittent_power_to_weight: f64,
    pub small_force_bandwidth: UnitValue,
    pub large_force_bandwidth: UnitValue,
    pub actuation_kind: ActuationKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown actuator `{0}`")]
    UnknownActuator(String),
    #[error("force amplitude must be positive, got {0} N")]
    NonPositiveAmplitude(f64),
    #[error("spec `{name}` violates invariant: {reason}")]
    InvalidSpec { name: String, reason: String },
    #[error(transparent)]
    Unit(#[from] UnitError),
}

impl ActuatorSpec {
    /// Force amplitude used for large-force tests: the intermittent rating when
    /// listed, the continuous rating otherwise.
    pub fn peak_force(&self) -> UnitValue {
        self.intermittent_force.unwrap_or(self.continuous_force)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |reason: String| CatalogError::InvalidSpec {
            name: self.name.to_string(),
            reason,
        };
        let expect = |v: &UnitValue, dim: Dimension, field: &str| -> Result<(), CatalogError> {
            if v.dimension() != dim {
                return Err(invalid(format!("{field} has dimension {} not {dim}", v.dimension())));
            }
            if !(v.magnitude > 0.0) {
                return Err(invalid(format!("{field} must be positive")));
            }
            Ok(())
        };
        expect(&self.weight, Dimension::Mass, "weight")?;
        expect(&self.max_stroke, Dimension::Length, "max_stroke")?;
        expect(&self.max_speed, Dimension::Speed, "max_speed")?;
        expect(&self.continuous_force, Dimension::Force, "continuous_force")?;
        expect(&self.continuous_power, Dimension::Power, "continuous_power")?;
        expect(&self.small_force_bandwidth, Dimension::Frequency, "small_force_bandwidth")?;
        expect(&self.large_force_bandwidth, Dimension::Frequency, "large_force_bandwidth")?;
        if let Some(f) = &self.intermittent_force {
            expect(f, Dimension::Force, "intermittent_force")?;
            if f.si() < self.continuous_force.si() {
                return Err(invalid("intermittent_force below continuous_force".into()));
            }
        }
        if let Some(p) = &self.intermittent_power {
            expect(p, Dimension::Power, "intermittent_power")?;
        }
        if self.actuation_kind == ActuationKind::Hydraulic
            && (self.intermittent_force.is_some() || self.intermittent_power.is_some())
        {
            return Err(invalid("hydraulic entries carry no separate intermittent rating".into()));
        }
        Ok(())
    }
}

const fn uv(magnitude: f64, unit: Unit) -> UnitValue {
    UnitValue::new(magnitude, unit)
}

/// The four datasheet entries, in listing order.
pub fn builtin_catalog() -> Vec<ActuatorSpec> {
    vec![
        ActuatorSpec {
            name: "SEA-23-23",
            weight: uv(2.5, Unit::PoundMass),
            max_stroke: uv(12.0, Unit::Inch),
            max_speed: uv(11.0, Unit::InchPerSecond),
            continuous_force: uv(127.0, Unit::PoundForce),
            continuous_power: uv(0.22, Unit::Horsepower),
            intermittent_force: Some(uv(300.0, Unit::PoundForce)),
            intermittent_power: Some(uv(0.85, Unit::Horsepower)),
            continuous_power_to_weight: 0.088,
            intermittent_power_to_weight: 0.34,
            small_force_bandwidth: uv(35.0, Unit::Hertz),
            large_force_bandwidth: uv(7.5, Unit::Hertz),
            actuation_kind: ActuationKind::Electric,
        },
        ActuatorSpec {
            name: "SEA-12-25",
            weight: uv(1.0, Unit::PoundMass),
            max_stroke: uv(12.0, Unit::Inch),
            max_speed: uv(13.0, Unit::InchPerSecond),
            continuous_force: uv(30.0, Unit::PoundForce),
            continuous_power: uv(0.06, Unit::Horsepower),
            intermittent_force: Some(uv(87.0, Unit::PoundForce)),
            intermittent_power: Some(uv(0.174, Unit::Horsepower)),
            continuous_power_to_weight: 0.06,
            intermittent_power_to_weight: 0.174,
            small_force_bandwidth: uv(25.0, Unit::Hertz),
            large_force_bandwidth: uv(5.0, Unit::Hertz),
            actuation_kind: ActuationKind::Electric,
        },
        ActuatorSpec {
            name: "HyEA-75-32",
            weight: uv(6.0, Unit::PoundMass),
            max_stroke: uv(12.0, Unit::Inch),
            max_speed: uv(122.0, Unit::InchPerSecond),
            continuous_force: uv(1324.0, Unit::PoundForce),
            continuous_power: uv(24.5, Unit::Horsepower),
            intermittent_force: None,
            intermittent_power: None,
            continuous_power_to_weight: 4.1,
            intermittent_power_to_weight: 4.1,
            small_force_bandwidth: uv(50.0, Unit::Hertz),
            large_force_bandwidth: uv(10.0, Unit::Hertz),
            actuation_kind: ActuationKind::Hydraulic,
        },
        ActuatorSpec {
            name: "HyEA-50-31",
            weight: uv(5.5, Unit::PoundMass),
            max_stroke: uv(12.0, Unit::Inch),
            max_speed: uv(132.0, Unit::InchPerSecond),
            continuous_force: uv(588.0, Unit::PoundForce),
            continuous_power: uv(11.8, Unit::Horsepower),
            intermittent_force: None,
            intermittent_power: None,
            continuous_power_to_weight: 2.1,
            intermittent_power_to_weight: 2.1,
            small_force_bandwidth: uv(50.0, Unit::Hertz),
            large_force_bandwidth: uv(10.0, Unit::Hertz),
            actuation_kind: ActuationKind::Hydraulic,
        },
    ]
}

/// Case-insensitive lookup in the built-in catalog.
pub fn find_spec(name: &str) -> Result<ActuatorSpec, CatalogError> {
    builtin_catalog()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| CatalogError::UnknownActuator(name.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyCheck {
    pub name: &'static str,
    pub derived: f64,
    pub listed: f64,
    pub unit: &'static str,
    pub relative_error: f64,
}

impl ConsistencyCheck {
    fn new(name: &'static str, derived: f64, listed: f64, unit: &'static str) -> Self {
        Self {
            name,
            derived,
            listed,
            unit,
            relative_error: (derived - listed).abs() / listed.abs(),
        }
    }
}

/// Cross-checks the listed power rows against force, speed and weight.
///
/// Intermittent power is not compared against force × speed because the
/// operating point of the intermittent rating is not stated; only its
/// power-to-weight row is checked.
pub fn consistency_report(spec: &ActuatorSpec) -> Vec<ConsistencyCheck> {
    let weight_lb = spec.weight.si() / KILOGRAMS_PER_POUND_MASS;
    let continuous_hp = spec.continuous_power.si() / WATTS_PER_HORSEPOWER;
    let derived_hp = spec.continuous_force.si() * spec.max_speed.si() / WATTS_PER_HORSEPOWER;
    // Hydraulic entries list identical continuous and intermittent ratings.
    let intermittent_hp = spec
        .intermittent_power
        .map(|p| p.si() / WATTS_PER_HORSEPOWER)
        .unwrap_or(continuous_hp);

    vec![
        ConsistencyCheck::new("continuous_power", derived_hp, continuous_hp, "hp"),
        ConsistencyCheck::new(
            "continuous_power_to_weight",
            continuous_hp / weight_lb,
            spec.continuous_power_to_weight,
            "hp/lb",
        ),
        ConsistencyCheck::new(
            "intermittent_power_to_weight",
            intermittent_hp / weight_lb,
            spec.intermittent_power_to_weight,
            "hp/lb",
        ),
    ]
}

/// Spring rate at which a sinusoidal force of the given amplitude, pushed into
/// a rigid load at the large-force bandwidth, just reaches the rated speed.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessDerivation {
    pub stiffness: UnitValue,
    pub amplitude: UnitValue,
    pub frequency: UnitValue,
    pub max_speed: UnitValue,
    pub explanation: String,
}

/// `K = 2π · f_large · F₀ / v_max`.
///
/// Deflection amplitude through the spring is `F₀/K`; at angular frequency ω the
/// drivetrain must move at `ω F₀ / K`, which is set equal to the rated speed.
pub fn derive_spring_stiffness(
    spec: &ActuatorSpec,
    amplitude: Option<UnitValue>,
    unit: Unit,
) -> Result<StiffnessDerivation, CatalogError> {
    let amplitude = amplitude.unwrap_or_else(|| spec.peak_force());
    let f0 = amplitude.in_unit(Unit::Newton)?;
    if !(f0 > 0.0) {
        return Err(CatalogError::NonPositiveAmplitude(f0));
    }
    if unit.dimension() != Dimension::Stiffness {
        return Err(UnitError::DimensionMismatch {
            from: Unit::NewtonPerMeter,
            to: unit,
            from_dim: Dimension::Stiffness,
            to_dim: unit.dimension(),
        }
        .into());
    }
    let freq = spec.large_force_bandwidth.si();
    let v_max = spec.max_speed.si();
    let k = 2.0 * PI * freq * f0 / v_max;
    let stiffness = UnitValue::new(k, Unit::NewtonPerMeter).convert(unit)?;
    let explanation = format!(
        "K = 2*pi * f_large * F0 / v_max = 2*pi * {freq} Hz * {f0:.4} N / {v_max:.6} m/s = {k:.1} N/m \
         (drive speed needed for a {f0:.1} N sine at {freq} Hz equals the rated speed)"
    );
    Ok(StiffnessDerivation {
        stiffness,
        amplitude,
        frequency: spec.large_force_bandwidth,
        max_speed: spec.max_speed,
        explanation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str) -> ActuatorSpec {
        find_spec(name).unwrap()
    }

    #[test]
    fn catalog_has_four_valid_entries() {
        let all = builtin_catalog();
        assert_eq!(all.len(), 4);
        for s in &all {
            s.validate().unwrap();
        }
        let names: Vec<_> = all.iter().map(|s| s.name).collect();
        assert_eq!(names, ["SEA-23-23", "SEA-12-25", "HyEA-75-32", "HyEA-50-31"]);
    }

    #[test]
    fn listed_values() {
        assert_eq!(spec("SEA-23-23").continuous_force, uv(127.0, Unit::PoundForce));
        assert_eq!(spec("HyEA-75-32").continuous_power, uv(24.5, Unit::Horsepower));
        assert_eq!(spec("SEA-12-25").small_force_bandwidth, uv(25.0, Unit::Hertz));
        assert_eq!(spec("sea-23-23").name, "SEA-23-23");
        assert!(find_spec("SEA-99").is_err());
    }

    #[test]
    fn continuous_power_checks() {
        let cases = [
            ("SEA-23-23", 127.0 * 11.0 / 6600.0, 0.22),
            ("SEA-12-25", 30.0 * 13.0 / 6600.0, 0.06),
            ("HyEA-75-32", 1324.0 * 122.0 / 6600.0, 24.5),
            ("HyEA-50-31", 588.0 * 132.0 / 6600.0, 11.8),
        ];
        for (name, derived, listed) in cases {
            let report = consistency_report(&spec(name));
            let c = &report[0];
            assert_eq!(c.name, "continuous_power");
            assert!((c.derived - derived).abs() < 1e-12, "{name}: {}", c.derived);
            assert!((c.listed - listed).abs() < 1e-12);
            let rel = (derived - listed).abs() / listed;
            assert!((c.relative_error - rel).abs() < 1e-12);
        }
        let c = &consistency_report(&spec("SEA-23-23"))[0];
        assert!((c.derived - 0.21167).abs() < 1e-4);
        assert!((c.relative_error - 0.0379).abs() < 1e-3);
    }

    #[test]
    fn all_checks_within_five_percent() {
        for s in builtin_catalog() {
            for c in consistency_report(&s) {
                assert!(c.relative_error < 0.05, "{} {}: {}", s.name, c.name, c.relative_error);
            }
        }
    }

    #[test]
    fn stiffness_examples() {
        let k = derive_spring_stiffness(&spec("SEA-23-23"), None, Unit::PoundForcePerInch).unwrap();
        assert!((k.stiffness.magnitude - 2.0 * PI * 7.5 * 300.0 / 11.0).abs() < 1e-9);
        assert!((k.stiffness.magnitude - 1285.2).abs() < 0.05);
        let si = k.stiffness.convert(Unit::NewtonPerMeter).unwrap().magnitude;
        assert!((si / 2.2508e5 - 1.0).abs() < 1e-4, "{si}");

        let k = derive_spring_stiffness(&spec("SEA-12-25"), None, Unit::PoundForcePerInch).unwrap();
        assert!((k.stiffness.magnitude - 210.2).abs() < 0.05);
        let k = derive_spring_stiffness(&spec("HyEA-75-32"), None, Unit::PoundForcePerInch).unwrap();
        assert!((k.stiffness.magnitude - 681.9).abs() < 0.05);
    }

    #[test]
    fn stiffness_is_homogeneous() {
        let s = spec("SEA-23-23");
        let base = derive_spring_stiffness(&s, Some(uv(100.0, Unit::PoundForce)), Unit::NewtonPerMeter)
            .unwrap()
            .stiffness
            .magnitude;
        let doubled = derive_spring_stiffness(&s, Some(uv(200.0, Unit::PoundForce)), Unit::NewtonPerMeter)
            .unwrap()
            .stiffness
            .magnitude;
        assert_eq!(doubled, 2.0 * base);

        let mut fast = s.clone();
        fast.max_speed = uv(22.0, Unit::InchPerSecond);
        let halved = derive_spring_stiffness(&fast, Some(uv(100.0, Unit::PoundForce)), Unit::NewtonPerMeter)
            .unwrap()
            .stiffness
            .magnitude;
        assert!((halved - base / 2.0).abs() <= base * 1e-15);
    }

    #[test]
    fn rejects_bad_amplitude() {
        let s = spec("SEA-23-23");
        assert!(matches!(
            derive_spring_stiffness(&s, Some(uv(0.0, Unit::Newton)), Unit::NewtonPerMeter),
            Err(CatalogError::NonPositiveAmplitude(_))
        ));
        assert!(derive_spring_stiffness(&s, Some(uv(1.0, Unit::Inch)), Unit::NewtonPerMeter).is_err());
        assert!(derive_spring_stiffness(&s, None, Unit::Newton).is_err());
    }

    #[test]
    fn validate_rejects_inverted_ratings() {
        let mut s = spec("SEA-23-23");
        s.intermittent_force = Some(uv(10.0, Unit::PoundForce));
        assert!(s.validate().is_err());
        let mut h = spec("HyEA-50-31");
        h.intermittent_power = Some(uv(1.0, Unit::Horsepower));
        assert!(h.validate().is_err());
    }
}
