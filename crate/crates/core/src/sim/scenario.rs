//! Scenario description: everything a run depends on.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::pilot::PilotScript;
use super::sensors::SensorSpec;
use crate::controller::ControllerConfig;
use crate::dynamics::{AirframeParams, ModelVariant, RigidBodyState, MAX_STEP_S};
use crate::propulsion::{BatteryState, MotorSpec};
use crate::radio::ChannelTrace;

pub const DEFAULT_DECIMATION: u32 = 10;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("channel trace {path}: {msg}")]
    Trace { path: PathBuf, msg: String },
}

/// Where stick commands come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    /// Channel-trace CSV, resolved against the scenario file's directory.
    Trace { path: PathBuf },
    /// Sticks arrive over the live link.
    Live,
    /// Built-in scripted pilot.
    Pilot(PilotScript),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub airframe: AirframeParams<f64>,
    pub motor: MotorSpec<f64>,
    pub battery: BatteryState<f64>,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub variant: ModelVariant,
    pub dt_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sensors: SensorSpec,
    pub input: InputSource,
    /// Record every n-th step.
    #[serde(default = "default_decimation")]
    pub decimation: u32,
    /// Starting state; defaults to at rest on the ground at the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<RigidBodyState<f64>>,
}

fn default_decimation() -> u32 {
    DEFAULT_DECIMATION
}

impl Scenario {
    /// Default airframe, a fresh 3S 3.7 Ah pack and the given input.
    pub fn with_input(input: InputSource) -> Self {
        Self {
            airframe: AirframeParams::default(),
            motor: MotorSpec::default(),
            battery: BatteryState::default(),
            controller: ControllerConfig::default(),
            variant: ModelVariant::default(),
            dt_s: 0.002,
            duration_s: 10.0,
            seed: 0,
            sensors: SensorSpec::default(),
            input,
            decimation: DEFAULT_DECIMATION,
            initial_state: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Loads and validates a scenario file. A relative trace path is made
    /// relative to the file's directory.
    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s: Scenario = serde_json::from_str(&text)?;
        if let InputSource::Trace { path: trace } = &mut s.input {
            if trace.is_relative() {
                if let Some(dir) = path.parent() {
                    *trace = dir.join(&*trace);
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn steps(&self) -> u64 {
        (self.duration_s / self.dt_s).round() as u64
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.dt_s.is_finite() && self.dt_s > 0.0 && self.dt_s <= MAX_STEP_S) {
            return invalid(format!("dt_s must be in (0, {MAX_STEP_S}], got {}", self.dt_s));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return invalid(format!("duration_s must be positive, got {}", self.duration_s));
        }
        if self.steps() == 0 {
            return invalid("duration_s shorter than one step".into());
        }
        if self.decimation == 0 {
            return invalid("decimation must be at least 1".into());
        }
        if let Err(e) = self.airframe.validate() {
            return invalid(format!("airframe: {e}"));
        }
        if !self.motor.is_valid() {
            return invalid("motor: kv, max_thrust and nominal_voltage must be positive".into());
        }
        if let Err(e) = self.battery.validate() {
            return invalid(format!("battery: {e}"));
        }
        if let Err(e) = self.controller.validate() {
            return invalid(format!("controller: {e}"));
        }
        if let Err(field) = self.sensors.validate() {
            return invalid(format!("{field} must be finite and non-negative"));
        }
        if let Some(s) = &self.initial_state {
            if !s.is_finite() {
                return invalid("initial_state must be finite".into());
            }
        }
        if let InputSource::Pilot(p) = &self.input {
            p.validate().map_err(ScenarioError::Invalid)?;
        }
        Ok(())
    }

    /// Loads the channel trace for trace-driven scenarios.
    pub fn load_trace(&self) -> Result<Option<(ChannelTrace, Vec<u8>)>, ScenarioError> {
        let InputSource::Trace { path } = &self.input else {
            return Ok(None);
        };
        let bytes = std::fs::read(path).map_err(|source| ScenarioError::Io {
            path: path.clone(),
            source,
        })?;
        let trace = ChannelTrace::from_reader(&bytes[..]).map_err(|e| ScenarioError::Trace {
            path: path.clone(),
            msg: e.to_string(),
        })?;
        Ok(Some((trace, bytes)))
    }

    /// SHA-256 over the canonical JSON form plus any trace bytes.
    pub fn digest(&self, trace_bytes: Option<&[u8]>) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("scenario serialises"));
        if let Some(b) = trace_bytes {
            h.update(b);
        }
        hex::encode(h.finalize())
    }
}
