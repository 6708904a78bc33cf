//! Arm/disarm gesture state machine and auto-disarm timer.

use serde::{Deserialize, Serialize};

use super::config::{ControllerConfig, SelfLevelSource};
use crate::radio::{ChannelSet, ARM_YAW};

/// How long the gesture must be held, s.
pub const ARM_HOLD_S: f64 = 1.0;
/// Armed inactivity before auto-disarm, s.
pub const AUTO_DISARM_S: f64 = 600.0;
/// Stick band, channel units, that counts as untouched.
pub const INACTIVITY_BAND: f64 = 5.0;
/// Aileron deflection that selects self-level during a gesture.
pub const LEVEL_TOGGLE_ROLL: f64 = 90.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmMode {
    #[default]
    Safe,
    Armed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gesture {
    #[default]
    None,
    Arm,
    Disarm,
}

impl Gesture {
    pub fn of(ch: &ChannelSet) -> Self {
        if !ch.throttle_idle() {
            Gesture::None
        } else if ch.yaw >= ARM_YAW {
            Gesture::Arm
        } else if ch.yaw <= -ARM_YAW {
            Gesture::Disarm
        } else {
            Gesture::None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ArmState {
    pub mode: ArmMode,
    pub self_level_on: bool,
    /// Time the current gesture has been held, s.
    pub hold_timer: f64,
    /// Armed time with untouched sticks, s.
    pub inactivity_timer: f64,
    /// Gesture being timed.
    pub gesture: Gesture,
}

impl ArmState {
    pub fn is_armed(&self) -> bool {
        self.mode == ArmMode::Armed
    }
}

fn inactive(ch: &ChannelSet) -> bool {
    ch.throttle_idle()
        && ch.roll.abs() <= INACTIVITY_BAND
        && ch.pitch.abs() <= INACTIVITY_BAND
        && ch.yaw.abs() <= INACTIVITY_BAND
}

/// Advances the state machine by `dt` seconds of stick input `ch`. Timers
/// fire on the step whose nominal end time is closest to the threshold.
pub fn arm_step(state: &ArmState, ch: &ChannelSet, cfg: &ControllerConfig, dt: f64) -> ArmState {
    let mut next = *state;
    let gesture = Gesture::of(ch);
    if gesture != state.gesture {
        next.hold_timer = 0.0;
    }
    next.gesture = gesture;
    if gesture == Gesture::None {
        next.hold_timer = 0.0;
    } else {
        next.hold_timer += dt;
    }

    if next.hold_timer >= ARM_HOLD_S - 0.5 * dt {
        let target = match gesture {
            Gesture::Arm => Some(ArmMode::Armed),
            Gesture::Disarm => Some(ArmMode::Safe),
            Gesture::None => None,
        };
        if let Some(mode) = target.filter(|m| *m != next.mode) {
            next.mode = mode;
            next.inactivity_timer = 0.0;
            if cfg.self_level_source == SelfLevelSource::Stick {
                if ch.roll >= LEVEL_TOGGLE_ROLL {
                    next.self_level_on = true;
                } else if ch.roll <= -LEVEL_TOGGLE_ROLL {
                    next.self_level_on = false;
                }
            }
        }
    }

    if next.mode == ArmMode::Armed && cfg.auto_disarm && inactive(ch) {
        next.inactivity_timer += dt;
        if next.inactivity_timer >= AUTO_DISARM_S - 0.5 * dt {
            next.mode = ArmMode::Safe;
            next.inactivity_timer = 0.0;
        }
    } else {
        next.inactivity_timer = 0.0;
    }

    if cfg.self_level_source == SelfLevelSource::Aux {
        next.self_level_on = ch.aux1;
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(state: ArmState, ch: &ChannelSet, cfg: &ControllerConfig, seconds: f64, dt: f64) -> ArmState {
        let n = (seconds / dt).round() as usize;
        (0..n).fold(state, |s, _| arm_step(&s, ch, cfg, dt))
    }

    #[test]
    fn mid_sticks_stay_safe() {
        let cfg = ControllerConfig::default();
        let s = run(ArmState::default(), &ChannelSet::sticks(50.0, 0.0, 0.0, 0.0), &cfg, 5.0, 0.002);
        assert_eq!(s.mode, ArmMode::Safe);
    }

    #[test]
    fn arm_after_hold_and_not_before() {
        let cfg = ControllerConfig::default();
        let arm = ChannelSet::sticks(0.0, 0.0, 0.0, 100.0);
        let s = run(ArmState::default(), &arm, &cfg, 0.99, 0.002);
        assert_eq!(s.mode, ArmMode::Safe);
        let s = run(s, &arm, &cfg, 0.01, 0.002);
        assert_eq!(s.mode, ArmMode::Armed);
        let s = run(ArmState::default(), &arm, &cfg, 1.5, 0.002);
        assert!(s.is_armed());
        assert!(!s.self_level_on);
    }

    #[test]
    fn interrupted_gesture_restarts() {
        let cfg = ControllerConfig::default();
        let arm = ChannelSet::sticks(0.0, 0.0, 0.0, 100.0);
        let s = run(ArmState::default(), &arm, &cfg, 0.8, 0.002);
        let s = arm_step(&s, &ChannelSet::sticks(0.0, 0.0, 0.0, 0.0), &cfg, 0.002);
        let s = run(s, &arm, &cfg, 0.8, 0.002);
        assert_eq!(s.mode, ArmMode::Safe);
    }

    #[test]
    fn disarm_and_level_toggle() {
        let cfg = ControllerConfig::default();
        let s = run(ArmState::default(), &ChannelSet::sticks(0.0, 100.0, 0.0, 100.0), &cfg, 1.2, 0.002);
        assert!(s.is_armed() && s.self_level_on);
        let s = run(s, &ChannelSet::sticks(0.0, -100.0, 0.0, -100.0), &cfg, 1.2, 0.002);
        assert_eq!(s.mode, ArmMode::Safe);
        assert!(!s.self_level_on);
    }

    #[test]
    fn aux_selects_level() {
        let cfg = ControllerConfig {
            self_level_source: SelfLevelSource::Aux,
            ..ControllerConfig::default()
        };
        let mut ch = ChannelSet::sticks(0.0, 100.0, 0.0, 100.0);
        let s = run(ArmState::default(), &ch, &cfg, 1.2, 0.002);
        assert!(!s.self_level_on);
        ch.aux1 = true;
        assert!(arm_step(&s, &ch, &cfg, 0.002).self_level_on);
    }

    #[test]
    fn auto_disarm_timing() {
        let cfg = ControllerConfig::default();
        let dt = 0.01;
        let s = run(ArmState::default(), &ChannelSet::sticks(0.0, 0.0, 0.0, 100.0), &cfg, 1.0, dt);
        assert!(s.is_armed());
        let idle = ChannelSet::sticks(0.0, 2.0, -3.0, 0.0);
        let s = run(s, &idle, &cfg, 599.99, dt);
        assert!(s.is_armed());
        let s = arm_step(&s, &idle, &cfg, dt);
        assert_eq!(s.mode, ArmMode::Safe);

        let off = ControllerConfig { auto_disarm: false, ..cfg };
        let s = run(ArmState { mode: ArmMode::Armed, ..ArmState::default() }, &idle, &off, 700.0, 0.1);
        assert!(s.is_armed());
    }

    proptest! {
        #[test]
        fn mode_only_changes_at_idle(
            seq in prop::collection::vec((5.01f64..110.0, -110.0f64..110.0, -110.0f64..110.0, -110.0f64..110.0), 1..400),
            armed in any::<bool>(),
        ) {
            let cfg = ControllerConfig::default();
            let mode = if armed { ArmMode::Armed } else { ArmMode::Safe };
            let mut s = ArmState { mode, ..ArmState::default() };
            for (t, r, p, y) in seq {
                s = arm_step(&s, &ChannelSet::sticks(t, r, p, y), &cfg, 0.01);
                prop_assert_eq!(s.mode, mode);
                prop_assert!(s.hold_timer >= 0.0 && s.inactivity_timer >= 0.0);
            }
        }
    }
}
