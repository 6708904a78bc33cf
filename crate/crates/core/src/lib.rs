//! Deterministic quadcopter simulator with an embedded KK2-style flight
//! controller emulation.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the closed-loop harness uses.

pub mod controller;
pub mod dynamics;
pub mod num;
pub mod propulsion;
pub mod radio;
pub mod sim;

pub use num::Real;

pub type State = dynamics::RigidBodyState<f64>;
pub type Airframe = dynamics::AirframeParams<f64>;
pub type Inputs = dynamics::ControlInputs<f64>;
pub type Thrusts = dynamics::MotorThrusts<f64>;
pub type Attitude = dynamics::Attitude<f64>;
pub type Motor = propulsion::MotorSpec<f64>;
pub type Battery = propulsion::BatteryState<f64>;
pub type BladeField = propulsion::BladeFieldSpec<f64>;
pub type Sensors = controller::SensorReading<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type State = crate::dynamics::RigidBodyState<f32>;
    pub type Airframe = crate::dynamics::AirframeParams<f32>;
    pub type Thrusts = crate::dynamics::MotorThrusts<f32>;
    pub type Battery = crate::propulsion::BatteryState<f32>;
}
