//! Series elastic actuator toolkit: datasheet catalog, two-mass plant,
//! PD force control, measured performance experiments, and a stance force
//! distribution solver for legged robots.

pub mod analysis;
pub mod catalog;
pub mod control;
pub mod defaults;
pub mod plant;
pub mod stance;
pub mod units;
pub mod waveform;

pub use catalog::{builtin_catalog, find_spec, ActuatorSpec, CatalogError};
pub use control::{run_closed_loop, Command, ControlError, ControllerConfig, Episode, PositionLoopConfig, Trajectory};
pub use plant::{LoadModel, PlantError, PlantParams, SimState};
pub use units::{Unit, UnitError, UnitValue};
pub use waveform::Waveform;
pub use stance::{distribute_forces, enumerate_oracle, net_wrench, FootContact, StanceProblem, StanceSolution};
