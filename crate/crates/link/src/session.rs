//! Network-free core of a live session: the stepping simulation, the stick
//! state it is fed, the failsafe and the command-authority rule.

use quadsim::controller::{ControllerConfig, ARM_HOLD_S};
use quadsim::radio::ChannelSet;
use quadsim::sim::{Scenario, ScenarioError, Simulation};

use crate::protocol::{ClientMessage, ServerMessage};

/// Silence from the commanding client longer than this reverts the sticks
/// to neutral with idle throttle.
pub const FAILSAFE_S: f64 = 0.5;
/// How long the arm/disarm shortcuts hold their stick gesture.
pub const GESTURE_S: f64 = ARM_HOLD_S + 0.25;
/// Longest stretch of simulated time one `advance` call may cover.
pub const MAX_CATCH_UP_S: f64 = 0.25;

pub const RATE_HZ_RANGE: (f64, f64) = (1.0, 100.0);

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("telemetry rate must be within 1..=100 Hz, got {0}")]
    Rate(f64),
}

#[derive(Debug)]
pub struct LiveSession {
    sim: Simulation,
    sticks: ChannelSet,
    last_command: Option<f64>,
    gesture: Option<(ChannelSet, f64)>,
    steps_per_telemetry: u64,
}

impl LiveSession {
    pub fn new(scenario: &Scenario, rate_hz: f64) -> Result<Self, SessionError> {
        if !(rate_hz >= RATE_HZ_RANGE.0 && rate_hz <= RATE_HZ_RANGE.1) {
            return Err(SessionError::Rate(rate_hz));
        }
        let sim = Simulation::new(scenario)?;
        let steps_per_telemetry = ((1.0 / (rate_hz * sim.dt())).round() as u64).max(1);
        Ok(Self {
            sim,
            sticks: ChannelSet::neutral(),
            last_command: None,
            gesture: None,
            steps_per_telemetry,
        })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }

    pub fn config(&self) -> &ControllerConfig {
        self.sim.config()
    }

    /// Sticks the next step will use.
    pub fn effective_sticks(&self) -> ChannelSet {
        match self.gesture {
            Some((ch, until)) if self.sim.time() < until => ch,
            _ => self.sticks,
        }
    }

    pub fn in_failsafe(&self, now: f64) -> bool {
        self.last_command.is_none_or(|t| now - t >= FAILSAFE_S)
    }

    /// The commanding client went away.
    pub fn release(&mut self) {
        self.last_command = None;
        self.gesture = None;
        self.sticks = ChannelSet::neutral();
    }

    /// Applies a command from the client holding authority at wall time `now`.
    pub fn command(&mut self, msg: &ClientMessage, now: f64) -> Vec<ServerMessage> {
        self.last_command = Some(now);
        match msg {
            ClientMessage::Sticks { .. } => {
                self.sticks = msg.channels().unwrap_or_default();
                Vec::new()
            }
            ClientMessage::Arm | ClientMessage::Disarm => {
                let yaw = if matches!(msg, ClientMessage::Arm) { 100.0 } else { -100.0 };
                self.gesture = Some((ChannelSet::sticks(0.0, 0.0, 0.0, yaw), self.sim.time() + GESTURE_S));
                self.sticks = ChannelSet::neutral();
                Vec::new()
            }
            ClientMessage::SetGains { axis, p, i } => match self.sim.config_mut().set_gains(*axis, *p, *i) {
                Ok(()) => {
                    let prefix = axis.key_prefix();
                    [format!("{prefix}_p"), format!("{prefix}_i")]
                        .into_iter()
                        .map(|k| self.read(&k))
                        .collect()
                }
                Err(e) => vec![ServerMessage::error(e.to_string(), e.key())],
            },
            ClientMessage::ConfigSet { key, value } => match self.sim.config_mut().set(key, value) {
                Ok(()) => vec![self.read(key)],
                Err(e) => vec![ServerMessage::error(e.to_string(), Some(e.key().unwrap_or("key")))],
            },
            ClientMessage::ConfigGet { key } => vec![self.read(key)],
        }
    }

    /// Answers `config_get` without touching the failsafe timer; allowed for
    /// read-only clients.
    pub fn read(&self, key: &str) -> ServerMessage {
        match self.sim.config().get(key) {
            Ok(value) => ServerMessage::Config { key: key.to_owned(), value },
            Err(e) => ServerMessage::error(e.to_string(), Some("key")),
        }
    }

    /// Steps the simulation up to `sim_target_s` (at most [`MAX_CATCH_UP_S`]
    /// ahead) and returns telemetry and events produced on the way.
    pub fn advance(&mut self, sim_target_s: f64, now: f64) -> Vec<ServerMessage> {
        if self.in_failsafe(now) {
            self.sticks = ChannelSet::neutral();
        }
        let mut out = Vec::new();
        let dt = self.sim.dt();
        let target = sim_target_s.min(self.sim.time() + MAX_CATCH_UP_S);
        while self.sim.time() + 0.5 * dt <= target {
            let ch = self.effective_sticks();
            if let Err(e) = self.sim.step(&ch) {
                out.push(ServerMessage::error(format!("simulation reset: {e}"), None));
                let config = self.sim.config().clone();
                let scenario = self.sim.scenario().clone();
                // The scenario validated once already, so rebuilding cannot fail.
                if let Ok(fresh) = Simulation::new(&scenario) {
                    self.sim = fresh;
                    *self.sim.config_mut() = config;
                }
                self.release();
                break;
            }
            out.extend(self.sim.drain_events().into_iter().map(ServerMessage::Event));
            if self.sim.steps().is_multiple_of(self.steps_per_telemetry) {
                out.push(ServerMessage::Telemetry(self.sim.record()));
            }
        }
        out
    }
}

/// First-come command authority. When the holder leaves, the longest
/// connected remaining client takes over.
#[derive(Debug, Default)]
pub struct Authority {
    connected: Vec<u64>,
}

impl Authority {
    /// Registers a client; true when it holds authority.
    pub fn connect(&mut self, id: u64) -> bool {
        self.connected.push(id);
        self.connected.len() == 1
    }

    /// Removes a client. Returns `(was_holder, promoted)`.
    pub fn disconnect(&mut self, id: u64) -> (bool, Option<u64>) {
        let Some(pos) = self.connected.iter().position(|&c| c == id) else {
            return (false, None);
        };
        self.connected.remove(pos);
        if pos == 0 {
            (true, self.connected.first().copied())
        } else {
            (false, None)
        }
    }

    pub fn holder(&self) -> Option<u64> {
        self.connected.first().copied()
    }

    pub fn is_holder(&self, id: u64) -> bool {
        self.holder() == Some(id)
    }
}
