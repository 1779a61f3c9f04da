//! Quasi-static simulator of a small piezo-driven quadruped whose four leg
//! modules form a compliant rhomboid body.
//!
//! All models are generic over the scalar type ([`Real`], `f32` or `f64`).
//! The `*64` aliases below fix the scalar to `f64`, which the configuration
//! layer and the command-line harness use.

// Validation uses `!(x > lo)` deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuator;
pub mod body;
pub mod config;
pub mod error;
pub mod gait;
pub mod response;
pub mod scalar;
pub mod sim;
pub mod solve;
pub mod sweep;
pub mod terrain;
pub mod transmission;

pub use actuator::ActuatorParams;
pub use body::{alpha_from_aspect_ratio, module_headings, BodyGeometry, BodyMode, BodyShape, ShapeClass};
pub use config::Settings;
pub use error::{Error, Result};
pub use gait::{leg_waveforms, GaitName, GaitSpec, LegDrive, TurnBias, TurnSide};
pub use response::{Axis, AxisDynamics};
pub use scalar::Real;
pub use sim::{gap_traverse, quasi_static_speed, run, LegModel, SimConfig, SimResult, SimState, Simulator};
pub use sweep::{speed_table, BodyVariant, SpeedRow, SweepCell, SweepSettings};
pub use terrain::{CorridorProfile, Terrain};
pub use transmission::{LegRanges, TransmissionGeometry};

pub type ActuatorParams64 = ActuatorParams<f64>;
pub type TransmissionGeometry64 = TransmissionGeometry<f64>;
pub type AxisDynamics64 = AxisDynamics<f64>;
pub type GaitSpec64 = GaitSpec<f64>;
pub type TurnBias64 = TurnBias<f64>;
pub type BodyGeometry64 = BodyGeometry<f64>;
pub type BodyShape64 = BodyShape<f64>;
pub type LegModel64 = LegModel<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type SimResult64 = SimResult<f64>;
pub type CorridorProfile64 = CorridorProfile<f64>;
