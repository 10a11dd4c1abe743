use sea_cli::config::{CommandKind, LoadKind};
use sea_cli::{parse_config, ConfigError, RunConfig};
use sea_core::find_spec;

#[test]
fn imperial_stiffness_is_converted_to_si() {
    let cfg = parse_config("plant.spring_stiffness = 1285.2 lbf/in").unwrap();
    // 1285.2 lbf/in with exact inch and pound-force constants.
    let expected = 1285.2 * 4.4482216152605 / 0.0254;
    assert!((cfg.plant.spring_stiffness - expected).abs() < 1e-9 * expected);
    assert!((cfg.plant.spring_stiffness / 2.2508e5 - 1.0).abs() < 1e-4);
}

#[test]
fn empty_file_gives_defaults() {
    assert_eq!(parse_config("").unwrap(), RunConfig::default());
    assert_eq!(parse_config("\n# only a comment\n\n").unwrap(), RunConfig::default());
}

#[test]
fn unknown_key_is_named_with_location() {
    let err = parse_config("\nplant.sprng_stiffness = 1").unwrap_err();
    assert_eq!(
        err,
        ConfigError::UnknownKey {
            key: "plant.sprng_stiffness".into(),
            line: 2,
            column: 1,
        }
    );
    assert!(err.to_string().contains("plant.sprng_stiffness"));
}

#[test]
fn unknown_foot_field_rejected() {
    let err = parse_config("stance.foot0.friction = 1").unwrap_err();
    assert!(matches!(err, ConfigError::UnknownKey { .. }), "{err}");
}

#[test]
fn wrong_dimension_unit_rejected() {
    let err = parse_config("plant.motor_mass = 3 lbf").unwrap_err();
    match err {
        ConfigError::BadUnit { unit, line, column, .. } => {
            assert_eq!(unit, "lbf");
            assert_eq!((line, column), (1, 22));
        }
        other => panic!("unexpected {other}"),
    }
    assert!(matches!(
        parse_config("plant.motor_mass = 3 furlongs").unwrap_err(),
        ConfigError::BadUnit { .. }
    ));
}

#[test]
fn malformed_lines_rejected() {
    assert!(matches!(
        parse_config("plant.motor_mass 3").unwrap_err(),
        ConfigError::Malformed { line: 1, .. }
    ));
    assert!(matches!(
        parse_config("plant.motor_mass =").unwrap_err(),
        ConfigError::Malformed { .. }
    ));
    assert!(matches!(
        parse_config("Plant.Motor_Mass = 3").unwrap_err(),
        ConfigError::Malformed { .. }
    ));
    assert!(matches!(
        parse_config("plant.motor_mass = heavy").unwrap_err(),
        ConfigError::BadValue { .. }
    ));
    assert!(matches!(
        parse_config("controller.feedforward = yes").unwrap_err(),
        ConfigError::BadValue { .. }
    ));
    assert!(matches!(
        parse_config("experiment.points = 2.5").unwrap_err(),
        ConfigError::BadValue { .. }
    ));
}

#[test]
fn values_of_every_kind() {
    let cfg = parse_config(
        "controller.feedforward = false\n\
         controller.kd = 20 ms\n\
         load.kind = spring\n\
         command.kind = sine\n\
         command.amplitude = 10 lbf\n\
         command.frequency = 2 hz\n\
         experiment.points = 7\n\
         stance.moment.y = 3 N*m\n",
    )
    .unwrap();
    assert!(!cfg.controller.feedforward);
    assert!((cfg.controller.kd - 0.02).abs() < 1e-15);
    assert_eq!(cfg.load.kind, LoadKind::Spring);
    assert_eq!(cfg.command.kind, CommandKind::Sine);
    assert_eq!(cfg.command.amplitude, 10.0 * 4.4482216152605);
    assert_eq!(cfg.command.frequency, 2.0);
    assert_eq!(cfg.experiment.points, 7);
    assert_eq!(cfg.stance.desired_moment.y, 3.0);
}

#[test]
fn round_trip_of_defaults_for_every_actuator() {
    for name in ["SEA-23-23", "SEA-12-25", "HyEA-75-32", "HyEA-50-31"] {
        let cfg = RunConfig::for_actuator(&find_spec(name).unwrap());
        let text = cfg.emit();
        let mut back = RunConfig::default();
        back.apply(&text).unwrap();
        assert_eq!(back, cfg, "{name}");
        assert_eq!(back.emit(), text);
    }
}

#[test]
fn round_trip_of_edited_config() {
    let cfg = parse_config(
        "plant.motor_mass = 0.1 lb\n\
         plant.max_speed = 7 in/s\n\
         controller.kp = 0.3\n\
         load.kind = prescribed\n\
         command.kind = position\n\
         stance.foot0.x = 0.123456789\n\
         stance.foot0.mu = 0\n\
         stance.foot0.max_normal_force = 250 lbf\n\
         stance.foot1.x = -0.3\n\
         stance.foot1.in_contact = false\n\
         stance.regularization = 0.01\n",
    )
    .unwrap();
    let back = parse_config(&cfg.emit()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.stance.feet.len(), 2);
    assert!(!back.stance.feet[1].in_contact);
    assert_eq!(back.stance.feet[0].max_normal_force, cfg.stance.feet[0].max_normal_force);
}
