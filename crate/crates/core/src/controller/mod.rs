//! Emulation of a KK2-style multirotor flight controller.

mod arming;
mod config;
mod loops;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use arming::{arm_step, ArmMode, ArmState, Gesture, ARM_HOLD_S, AUTO_DISARM_S, INACTIVITY_BAND, LEVEL_TOGGLE_ROLL};
pub use config::{
    ConfigError, ControllerConfig, GainAxis, SelfLevelSource, HEIGHT_DAMP_UNIT, LEVEL_I_UNIT, LEVEL_P_UNIT,
    MAX_ANGLE, MAX_RATE, MAX_YAW_RATE, RATE_I_UNIT, RATE_P_UNIT, STANDARD_GRAVITY, YAW_I_UNIT, YAW_P_UNIT,
};
pub use loops::{
    accel_tilt, attitude_estimate, blend_factor, height_dampening, mix_raw, mixer, pi_step, servo_filter,
    stick_scale, PiGains, SensorReading, ESTIMATOR_TAU_S,
};

use crate::dynamics::Attitude;
use crate::radio::{ChannelSet, PULSE_MAX_US, PULSE_MIN_US};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlightMode {
    #[default]
    Safe,
    Rate,
    #[serde(rename = "selflevel")]
    SelfLevel,
}

impl FlightMode {
    pub fn label(self) -> &'static str {
        match self {
            FlightMode::Safe => "safe",
            FlightMode::Rate => "rate",
            FlightMode::SelfLevel => "selflevel",
        }
    }
}

impl fmt::Display for FlightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for FlightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "safe" => Ok(FlightMode::Safe),
            "rate" => Ok(FlightMode::Rate),
            "selflevel" => Ok(FlightMode::SelfLevel),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

/// ESC command pulses, µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorOutputs(pub [f64; 4]);

impl MotorOutputs {
    pub const IDLE: MotorOutputs = MotorOutputs([PULSE_MIN_US; 4]);

    fn from_fractions(f: [f64; 4]) -> Self {
        MotorOutputs(f.map(|v| (PULSE_MIN_US + v * (PULSE_MAX_US - PULSE_MIN_US)).clamp(PULSE_MIN_US, PULSE_MAX_US)))
    }
}

/// Everything the controller carries between updates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub arm: ArmState,
    pub estimate: Attitude<f64>,
    /// Rate-loop integrators: roll, pitch, yaw.
    pub rate_integrators: [f64; 3],
    /// Attitude-loop integrators: roll, pitch.
    pub level_integrators: [f64; 2],
    /// Motor fractions after the servo filter.
    pub filtered: [f64; 4],
    pub mode: FlightMode,
    /// Latched by a non-finite sensor sample; cleared by the next arm.
    pub sensor_fault: bool,
}

impl ControllerState {
    fn reset_loops(&mut self) {
        self.rate_integrators = [0.0; 3];
        self.level_integrators = [0.0; 2];
    }
}

struct Gains {
    rate: [PiGains<f64>; 3],
    level: PiGains<f64>,
}

fn gains(cfg: &ControllerConfig) -> Gains {
    let rate = |p, i, lim, pu, iu| PiGains::from_setting(p, i, lim, pu, iu);
    Gains {
        rate: [
            rate(cfg.roll_p, cfg.roll_i, cfg.roll_integral_limit, RATE_P_UNIT, RATE_I_UNIT),
            rate(cfg.pitch_p, cfg.pitch_i, cfg.pitch_integral_limit, RATE_P_UNIT, RATE_I_UNIT),
            rate(cfg.yaw_p, cfg.yaw_i, cfg.yaw_integral_limit, YAW_P_UNIT, YAW_I_UNIT),
        ],
        level: rate(
            cfg.self_level_p,
            cfg.self_level_i,
            cfg.self_level_integral_limit,
            LEVEL_P_UNIT,
            LEVEL_I_UNIT,
        ),
    }
}

/// One controller cycle. Pure: the result depends only on the arguments.
pub fn controller_update(
    state: &ControllerState,
    cfg: &ControllerConfig,
    ch: &ChannelSet,
    sensors: &SensorReading<f64>,
    dt: f64,
) -> (ControllerState, MotorOutputs) {
    let mut next = *state;
    let ch = if ch.is_finite() { ch.clamped() } else { ChannelSet::neutral() };

    if !sensors.is_finite() {
        next.arm.mode = ArmMode::Safe;
        next.arm.hold_timer = 0.0;
        next.arm.inactivity_timer = 0.0;
        next.sensor_fault = true;
        next.reset_loops();
        next.filtered = [0.0; 4];
        next.mode = FlightMode::Safe;
        return (next, MotorOutputs::IDLE);
    }

    let was_armed = state.arm.is_armed();
    next.arm = arm_step(&state.arm, &ch, cfg, dt);
    if next.arm.is_armed() && !was_armed {
        next.sensor_fault = false;
    }
    if next.sensor_fault {
        next.arm.mode = ArmMode::Safe;
    }
    next.estimate = attitude_estimate(&state.estimate, sensors, dt, blend_factor(dt));

    if !next.arm.is_armed() {
        next.reset_loops();
        next.filtered = [0.0; 4];
        next.mode = FlightMode::Safe;
        return (next, MotorOutputs::IDLE);
    }
    next.mode = if next.arm.self_level_on { FlightMode::SelfLevel } else { FlightMode::Rate };

    let target = if ch.throttle_idle() {
        next.reset_loops();
        [0.0; 4]
    } else {
        let g = gains(cfg);
        let roll = stick_scale(ch.roll, cfg.stick_scaling_roll) / 100.0;
        let pitch = stick_scale(ch.pitch, cfg.stick_scaling_pitch) / 100.0;
        let yaw = stick_scale(ch.yaw, cfg.stick_scaling_yaw) / 100.0;
        let throttle = (stick_scale(ch.throttle, cfg.stick_scaling_throttle) / 100.0).clamp(0.0, 1.0);

        let mut rate_sp = [roll * MAX_RATE, pitch * MAX_RATE, -yaw * MAX_YAW_RATE];
        if next.arm.self_level_on {
            let est = [next.estimate.roll, next.estimate.pitch];
            let angle_sp = [roll * MAX_ANGLE, pitch * MAX_ANGLE];
            for axis in 0..2 {
                let (out, integ) = pi_step(angle_sp[axis], est[axis], &g.level, state.level_integrators[axis], dt);
                next.level_integrators[axis] = integ;
                rate_sp[axis] = out;
            }
        } else {
            next.level_integrators = [0.0; 2];
        }

        let mut out = [0.0; 3];
        for axis in 0..3 {
            let (o, integ) = pi_step(rate_sp[axis], sensors.gyro[axis], &g.rate[axis], state.rate_integrators[axis], dt);
            next.rate_integrators[axis] = integ;
            out[axis] = o.clamp(-1.0, 1.0);
        }

        let t = throttle + height_dampening(sensors.accel[2], cfg);
        // Roll +: right side down, so the left pair pushes. Pitch +: nose
        // down, so the rear pair pushes. Yaw +: counter-clockwise, so the CW
        // props speed up to react against the frame.
        let floor = f64::from(cfg.min_throttle) / 100.0;
        mixer(t, out[0], -out[1], -out[2]).map(|m| m.max(floor))
    };

    for (f, m) in next.filtered.iter_mut().zip(target) {
        *f = servo_filter(*f, m, dt, cfg.servo_filter_ms);
    }
    (next, MotorOutputs::from_fractions(next.filtered))
}

/// Owning wrapper around [`controller_update`].
#[derive(Debug, Clone, Default)]
pub struct Controller {
    pub config: ControllerConfig,
    pub state: ControllerState,
}

impl Controller {
    pub fn new(config: ControllerConfig) -> Self {
        Self { config, state: ControllerState::default() }
    }

    pub fn update(&mut self, ch: &ChannelSet, sensors: &SensorReading<f64>, dt: f64) -> MotorOutputs {
        let (state, out) = controller_update(&self.state, &self.config, ch, sensors, dt);
        self.state = state;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 0.002;

    fn armed(cfg: &ControllerConfig, roll_during_arm: f64) -> ControllerState {
        let mut s = ControllerState::default();
        let gesture = ChannelSet::sticks(0.0, roll_during_arm, 0.0, 100.0);
        for _ in 0..600 {
            s = controller_update(&s, cfg, &gesture, &SensorReading::at_rest(9.81), DT).0;
        }
        assert!(s.arm.is_armed());
        s
    }

    #[test]
    fn safe_outputs_idle() {
        let cfg = ControllerConfig::default();
        let (s, out) = controller_update(
            &ControllerState::default(),
            &cfg,
            &ChannelSet::sticks(80.0, 50.0, -30.0, 20.0),
            &SensorReading::at_rest(9.81),
            DT,
        );
        assert_eq!(out, MotorOutputs::IDLE);
        assert_eq!(s.mode, FlightMode::Safe);
    }

    #[test]
    fn symmetric_hover_gives_equal_outputs() {
        let cfg = ControllerConfig::default();
        let mut s = armed(&cfg, 0.0);
        let hover = ChannelSet::sticks(50.0, 0.0, 0.0, 0.0);
        let mut out = MotorOutputs::IDLE;
        for _ in 0..200 {
            (s, out) = controller_update(&s, &cfg, &hover, &SensorReading::at_rest(9.81), DT);
        }
        assert!(out.0.iter().all(|m| *m == out.0[0]));
        assert!(out.0[0] > 1400.0 && out.0[0] <= 1500.0);
        assert_eq!(s.mode, FlightMode::Rate);
    }

    #[test]
    fn idle_when_armed_at_zero_throttle() {
        let cfg = ControllerConfig { servo_filter_ms: 0, ..ControllerConfig::default() };
        let s = armed(&cfg, 0.0);
        let (_, out) = controller_update(&s, &cfg, &ChannelSet::sticks(0.0, 0.0, 0.0, 0.0), &SensorReading::at_rest(9.81), DT);
        assert_eq!(out, MotorOutputs::IDLE);
        let (_, out) = controller_update(&s, &cfg, &ChannelSet::sticks(6.0, 0.0, 0.0, 0.0), &SensorReading::at_rest(9.81), DT);
        assert!(out.0.iter().all(|m| *m >= 1100.0));
    }

    #[test]
    fn tilted_right_pushes_right_side_up() {
        // Craft held with the right side down: the right pair (2, 3) must speed up.
        let cfg = ControllerConfig { servo_filter_ms: 0, ..ControllerConfig::default() };
        let mut s = armed(&cfg, 100.0);
        assert!(s.arm.self_level_on);
        let phi: f64 = 0.1;
        let tilted = SensorReading { gyro: [0.0; 3], accel: [0.0, 9.81 * phi.sin(), 9.81 * phi.cos()] };
        let mut out = MotorOutputs::IDLE;
        for _ in 0..500 {
            (s, out) = controller_update(&s, &cfg, &ChannelSet::sticks(50.0, 0.0, 0.0, 0.0), &tilted, DT);
        }
        assert_eq!(s.mode, FlightMode::SelfLevel);
        let [m1, m2, m3, m4] = out.0;
        assert!(m2 + m3 > m1 + m4, "{out:?}");
        assert!((m1 - m4).abs() < 1e-9 && (m2 - m3).abs() < 1e-9);
    }

    #[test]
    fn sensor_fault_forces_safe() {
        let cfg = ControllerConfig::default();
        let s = armed(&cfg, 0.0);
        let bad = SensorReading { gyro: [f64::NAN, 0.0, 0.0], accel: [0.0, 0.0, 9.81] };
        let (s, out) = controller_update(&s, &cfg, &ChannelSet::sticks(50.0, 0.0, 0.0, 0.0), &bad, DT);
        assert_eq!(out, MotorOutputs::IDLE);
        assert!(!s.arm.is_armed());
        let (s, _) = controller_update(&s, &cfg, &ChannelSet::sticks(0.0, 0.0, 0.0, 100.0), &SensorReading::at_rest(9.81), DT);
        assert!(s.sensor_fault);
        let s = armed(&cfg, 0.0);
        assert!(!s.sensor_fault);
    }

    #[test]
    fn mode_labels() {
        for m in [FlightMode::Safe, FlightMode::Rate, FlightMode::SelfLevel] {
            assert_eq!(m.label().parse::<FlightMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.label()));
        }
    }

    proptest! {
        #[test]
        fn outputs_always_in_range(
            seq in prop::collection::vec(
                (0.0f64..110.0, -110.0f64..110.0, -110.0f64..110.0, -110.0f64..110.0, -20.0f64..20.0, -30.0f64..30.0),
                1..200,
            ),
            level in any::<bool>(),
        ) {
            let cfg = ControllerConfig::default();
            let mut s = ControllerState::default();
            s.arm.mode = ArmMode::Armed;
            s.arm.self_level_on = level;
            for (t, r, p, y, w, a) in seq {
                let sensors = SensorReading { gyro: [w, -w, w * 0.5], accel: [a, -a, 9.81 + a] };
                let (next, out) = controller_update(&s, &cfg, &ChannelSet::sticks(t, r, p, y), &sensors, DT);
                for m in out.0 {
                    prop_assert!((PULSE_MIN_US..=PULSE_MAX_US).contains(&m));
                }
                if !next.arm.is_armed() {
                    prop_assert_eq!(out, MotorOutputs::IDLE);
                }
                s = next;
            }
        }

        #[test]
        fn update_is_deterministic(t in 0.0f64..100.0, r in -100.0f64..100.0, w in -5.0f64..5.0) {
            let cfg = ControllerConfig::default();
            let mut s = ControllerState::default();
            s.arm.mode = ArmMode::Armed;
            let sensors = SensorReading { gyro: [w, 0.1, -w], accel: [0.2, 0.0, 9.7] };
            let ch = ChannelSet::sticks(t, r, 0.0, 0.0);
            prop_assert_eq!(
                controller_update(&s, &cfg, &ch, &sensors, DT),
                controller_update(&s, &cfg, &ch, &sensors, DT)
            );
        }
    }
}
