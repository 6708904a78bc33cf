//! Closed-loop harness: scenarios, the scripted pilot, the sensor model,
//! telemetry logs and post-flight checks.

mod endurance;
mod pilot;
mod primitives;
mod runner;
mod scenario;
mod sensors;
mod telemetry;

pub use endurance::{endurance_sim, endurance_sim_with, EnduranceReport, ENDURANCE_DT_S};
pub use pilot::{Pilot, PilotAction, PilotScript, PilotSegment};
pub use primitives::{motion_primitive_check, Primitive, PrimitiveError, PrimitiveLimits, PrimitiveReport};
pub use runner::{run_scenario, SimError, SimEvent, Simulation, BEEP_WINDOW_V, CURRENT_EXPONENT};
pub use scenario::{InputSource, Scenario, ScenarioError, DEFAULT_DECIMATION};
pub use sensors::{SensorModel, SensorSpec, GYRO_VIBRATION_COUPLING};
pub use telemetry::{
    csv_export, csv_export_path, csv_import, CsvError, FlightLog, TelemetryRecord, TELEMETRY_CSV_HEADER,
};
