//! The closed loop: sticks → controller → ESCs → motors → rigid body →
//! battery → sensors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::pilot::Pilot;
use super::scenario::{InputSource, Scenario, ScenarioError};
use super::sensors::SensorModel;
use super::telemetry::{FlightLog, TelemetryRecord};
use crate::controller::{Controller, ControllerConfig, FlightMode, MotorOutputs, SensorReading};
use crate::dynamics::{self, DynamicsError, MotorThrusts, RigidBodyState};
use crate::propulsion::{
    alarm_beep_interval, battery_step, low_voltage_alarm, pwm_to_throttle, throttle_to_thrust, BatteryState,
    BROWNOUT_VOLTAGE, HOVER_CURRENT_A,
};
use crate::radio::{ChannelSet, ChannelTrace};

/// Exponent of the throttle-to-current law.
pub const CURRENT_EXPONENT: f64 = 1.5;
/// Beeping starts this far above the alarm set-point, V.
pub const BEEP_WINDOW_V: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("state became non-finite at step {step} (t = {t_s} s, record {record_index}): {source}")]
    NonFinite {
        step: u64,
        t_s: f64,
        record_index: usize,
        #[source]
        source: DynamicsError,
    },
}

/// Discrete happenings the live link forwards to clients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    Armed { t_s: f64 },
    Disarmed { t_s: f64 },
    /// One beep; `active` once the voltage is at or below the set-point.
    Alarm { t_s: f64, voltage: f64, interval_s: f64, active: bool },
    Brownout { t_s: f64, voltage: f64 },
}

/// Stepping simulation. Owns all mutable state of one craft.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    controller: Controller,
    state: RigidBodyState<f64>,
    battery: BatteryState<f64>,
    sensors: SensorModel,
    reading: SensorReading<f64>,
    outputs: MotorOutputs,
    thrust: [f64; 4],
    current: f64,
    steps: u64,
    brownout: bool,
    next_beep_t: f64,
    hover_throttle: f64,
    events: Vec<SimEvent>,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        let state = scenario.initial_state.unwrap_or_else(RigidBodyState::at_rest);
        let mut sensors = SensorModel::new(scenario.sensors, scenario.seed);
        let g = scenario.airframe.gravity;
        let accel = if on_ground(&state) { [0.0; 3] } else { [0.0, 0.0, -g] };
        let reading = sensors.sample(&state, accel, g, 0.0, scenario.dt_s);
        let mut controller = Controller::new(scenario.controller.clone());
        controller.state.estimate = state.attitude;
        let hover_throttle = scenario
            .motor
            .throttle_for_thrust(scenario.airframe.hover_thrust_per_motor());
        Ok(Self {
            scenario: scenario.clone(),
            controller,
            state,
            battery: scenario.battery,
            sensors,
            reading,
            outputs: MotorOutputs::IDLE,
            thrust: [0.0; 4],
            current: 0.0,
            steps: 0,
            brownout: false,
            next_beep_t: 0.0,
            hover_throttle,
            events: Vec::new(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn dt(&self) -> f64 {
        self.scenario.dt_s
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Simulated time, s. Computed from the step count so it never drifts.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.scenario.dt_s
    }

    pub fn state(&self) -> &RigidBodyState<f64> {
        &self.state
    }

    /// Overwrites the rigid-body state, e.g. to inject a disturbance. The
    /// sensors see it from the next step on.
    pub fn set_state(&mut self, state: RigidBodyState<f64>) {
        self.state = state;
    }

    pub fn battery(&self) -> &BatteryState<f64> {
        &self.battery
    }

    pub fn outputs(&self) -> MotorOutputs {
        self.outputs
    }

    pub fn is_brownout(&self) -> bool {
        self.brownout
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.controller.config
    }

    /// Settings take effect on the next step.
    pub fn config_mut(&mut self) -> &mut ControllerConfig {
        &mut self.controller.config
    }

    pub fn drain_events(&mut self) -> Vec<SimEvent> {
        std::mem::take(&mut self.events)
    }

    /// Battery current for the given motor throttles.
    pub fn current_draw(&self, throttles: &[f64; 4]) -> f64 {
        let sum: f64 = throttles.iter().sum();
        if sum <= 0.0 {
            return 0.0;
        }
        HOVER_CURRENT_A * (sum / (4.0 * self.hover_throttle)).powf(CURRENT_EXPONENT)
    }

    pub fn record(&self) -> TelemetryRecord {
        let s = &self.state;
        let c = &self.controller.state;
        TelemetryRecord {
            t_s: self.time(),
            position: s.position,
            attitude: [s.attitude.roll, s.attitude.pitch, s.attitude.yaw],
            rates: s.rates,
            thrust: self.thrust,
            vbatt_v: self.battery.voltage,
            ibatt_a: self.current,
            remaining_ah: self.battery.remaining,
            armed: c.arm.is_armed(),
            mode: if c.arm.is_armed() { c.mode } else { FlightMode::Safe },
        }
    }

    /// Advances one step with stick input `ch`.
    pub fn step(&mut self, ch: &ChannelSet) -> Result<(), DynamicsError> {
        let sc = &self.scenario;
        let dt = sc.dt_s;
        let t_next = (self.steps + 1) as f64 * dt;

        let was_armed = self.controller.state.arm.is_armed();
        self.outputs = self.controller.update(ch, &self.reading, dt);
        let armed = self.controller.state.arm.is_armed();
        if armed != was_armed {
            self.events.push(if armed {
                SimEvent::Armed { t_s: t_next }
            } else {
                SimEvent::Disarmed { t_s: t_next }
            });
        }

        if !self.brownout && (self.battery.voltage <= BROWNOUT_VOLTAGE || self.battery.is_depleted()) {
            self.brownout = true;
            self.events.push(SimEvent::Brownout { t_s: self.time(), voltage: self.battery.voltage });
        }
        let throttles = self.outputs.0.map(pwm_to_throttle);
        let voltage = self.battery.voltage;
        self.thrust = if self.brownout {
            [0.0; 4]
        } else {
            throttles.map(|u| throttle_to_thrust(u, voltage, &sc.motor))
        };
        let thrusts = MotorThrusts(self.thrust);

        let mut next = dynamics::step(&self.state, &thrusts, &sc.airframe, sc.variant, dt)?;
        let grounded = on_ground(&next);
        if grounded {
            next.position[2] = 0.0;
            next.velocity = [0.0; 3];
            next.rates = [0.0; 3];
            next.attitude.roll = 0.0;
            next.attitude.pitch = 0.0;
        }
        self.state = next;

        self.current = if self.brownout { 0.0 } else { self.current_draw(&throttles) };
        self.battery = battery_step(&self.battery, self.current, dt);

        let tenths = self.controller.config.alarm_tenths;
        let setpoint = f64::from(tenths) / 10.0;
        let v = self.battery.voltage;
        if tenths > 0 && v <= setpoint + BEEP_WINDOW_V && t_next >= self.next_beep_t {
            let interval = alarm_beep_interval(v, setpoint, setpoint + BEEP_WINDOW_V);
            self.events.push(SimEvent::Alarm {
                t_s: t_next,
                voltage: v,
                interval_s: interval,
                active: low_voltage_alarm(v, tenths),
            });
            self.next_beep_t = t_next + interval;
        }

        let g = sc.airframe.gravity;
        let accel = if grounded {
            [0.0; 3]
        } else {
            let d = dynamics::derivative(&self.state, &thrusts, &sc.airframe, sc.variant);
            [d[3], d[4], d[5]]
        };
        let mean_throttle = throttles.iter().sum::<f64>() / 4.0;
        let rpm = if self.brownout { 0.0 } else { sc.motor.rpm(mean_throttle, voltage) };
        self.reading = self.sensors.sample(&self.state, accel, g, rpm, dt);
        self.steps += 1;
        Ok(())
    }
}

/// Resting on or below the ground plane and not climbing.
fn on_ground(s: &RigidBodyState<f64>) -> bool {
    s.position[2] <= 0.0 && s.velocity[2] <= 0.0
}

enum Driver {
    Trace(ChannelTrace),
    Pilot(Box<Pilot>),
    Idle,
}

/// Runs a scenario to completion and returns its decimated log.
pub fn run_scenario(scenario: &Scenario) -> Result<FlightLog, SimError> {
    scenario.validate()?;
    let loaded = scenario.load_trace()?;
    let digest = scenario.digest(loaded.as_ref().map(|(_, b)| b.as_slice()));
    let mut driver = match (&scenario.input, loaded) {
        (_, Some((trace, _))) => Driver::Trace(trace),
        (InputSource::Pilot(p), None) => Driver::Pilot(Box::new(Pilot::new(p.clone()))),
        _ => Driver::Idle,
    };

    let mut sim = Simulation::new(scenario)?;
    let steps = scenario.steps();
    let dec = u64::from(scenario.decimation);
    let mut records = Vec::with_capacity((steps / dec + 1) as usize);
    records.push(sim.record());
    for _ in 0..steps {
        let t = sim.time();
        let ch = match &mut driver {
            Driver::Trace(tr) => tr.sample(t),
            Driver::Pilot(p) => p.command(t, sim.state(), sim.dt()),
            Driver::Idle => ChannelSet::sticks(0.0, 0.0, 0.0, 0.0),
        };
        sim.step(&ch).map_err(|source| SimError::NonFinite {
            step: sim.steps(),
            t_s: t,
            record_index: records.len(),
            source,
        })?;
        if sim.steps() % dec == 0 {
            records.push(sim.record());
        }
    }
    Ok(FlightLog { records, digest })
}
