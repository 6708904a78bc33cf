//! The flight controller's "Receiver Test" screen.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ChannelSet, ARM_YAW, CHANNEL_LIMIT, FULL_THROTTLE, IDLE_THROTTLE};

/// A frame older than this means "No signal".
pub const NO_SIGNAL_TIMEOUT_S: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThrottleLabel {
    Idle,
    Full,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArmZone {
    SafeZone,
    Arm,
    Disarm,
}

impl ArmZone {
    pub fn of(ch: &ChannelSet) -> Self {
        if ch.throttle_idle() && ch.yaw >= ARM_YAW {
            ArmZone::Arm
        } else if ch.throttle_idle() && ch.yaw <= -ARM_YAW {
            ArmZone::Disarm
        } else {
            ArmZone::SafeZone
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ArmZone::SafeZone => "Safe Zone",
            ArmZone::Arm => "Arm",
            ArmZone::Disarm => "Disarm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReceiverReport {
    NoSignal,
    Live {
        throttle: ThrottleLabel,
        roll: f64,
        pitch: f64,
        yaw: f64,
        aux1: bool,
        zone: ArmZone,
        /// Axes beyond ±110 (`"roll"`, `"pitch"`, `"yaw"`).
        over_limit: Vec<&'static str>,
    },
}

impl ReceiverReport {
    pub fn zone(&self) -> Option<ArmZone> {
        match self {
            ReceiverReport::NoSignal => None,
            ReceiverReport::Live { zone, .. } => Some(*zone),
        }
    }

    pub fn over_limit(&self) -> &[&'static str] {
        match self {
            ReceiverReport::NoSignal => &[],
            ReceiverReport::Live { over_limit, .. } => over_limit,
        }
    }
}

impl fmt::Display for ReceiverReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverReport::NoSignal => write!(f, "No signal"),
            ReceiverReport::Live {
                throttle,
                roll,
                pitch,
                yaw,
                aux1,
                zone,
                over_limit,
            } => {
                let thr = match throttle {
                    ThrottleLabel::Idle => "Idle".to_string(),
                    ThrottleLabel::Full => "Full".to_string(),
                    ThrottleLabel::Value(v) => format!("{v:.0}"),
                };
                write!(
                    f,
                    "Aileron: {roll:.0} | Elevator: {pitch:.0} | Throttle: {thr} | Rudder: {yaw:.0} | Aux: {} | {}",
                    if *aux1 { "ON" } else { "OFF" },
                    zone.label()
                )?;
                if !over_limit.is_empty() {
                    write!(f, " | OVER ±110: {}", over_limit.join(","))?;
                }
                Ok(())
            }
        }
    }
}

/// Renders the receiver test screen for the latest channel values.
pub fn receiver_test(ch: &ChannelSet) -> ReceiverReport {
    let throttle = if ch.throttle <= IDLE_THROTTLE {
        ThrottleLabel::Idle
    } else if ch.throttle > FULL_THROTTLE {
        ThrottleLabel::Full
    } else {
        ThrottleLabel::Value(ch.throttle)
    };
    let over_limit = [("roll", ch.roll), ("pitch", ch.pitch), ("yaw", ch.yaw)]
        .into_iter()
        .filter(|(_, v)| v.abs() > CHANNEL_LIMIT)
        .map(|(name, _)| name)
        .collect();
    ReceiverReport::Live {
        throttle,
        roll: ch.roll,
        pitch: ch.pitch,
        yaw: ch.yaw,
        aux1: ch.aux1,
        zone: ArmZone::of(ch),
        over_limit,
    }
}

/// Like [`receiver_test`], but reports "No signal" when the last frame is
/// missing or older than [`NO_SIGNAL_TIMEOUT_S`].
pub fn receiver_test_timed(last: Option<(&ChannelSet, f64)>) -> ReceiverReport {
    match last {
        Some((ch, age_s)) if age_s <= NO_SIGNAL_TIMEOUT_S => receiver_test(ch),
        _ => ReceiverReport::NoSignal,
    }
}

/// Classification of the largest stick travel seen on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeStatus {
    /// Never reached 90.
    Short,
    /// Peaked within 90..=100.
    Ok,
    /// Peaked within 100..=110; tolerated.
    High,
    /// Exceeded 110.
    Violation,
}

/// Tracks maximum travel per axis over a stick-calibration session.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RangeCheck {
    /// Largest |value| seen for roll, pitch, yaw.
    pub max_travel: [f64; 3],
}

impl RangeCheck {
    pub fn observe(&mut self, ch: &ChannelSet) {
        for (m, v) in self.max_travel.iter_mut().zip([ch.roll, ch.pitch, ch.yaw]) {
            *m = m.max(v.abs());
        }
    }

    pub fn status(&self) -> [RangeStatus; 3] {
        self.max_travel.map(|m| {
            if m > CHANNEL_LIMIT {
                RangeStatus::Violation
            } else if m > 100.0 {
                RangeStatus::High
            } else if m >= 90.0 {
                RangeStatus::Ok
            } else {
                RangeStatus::Short
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_one_labels() {
        let r = receiver_test(&ChannelSet::neutral());
        assert_eq!(r.zone(), Some(ArmZone::SafeZone));
        assert!(r.to_string().contains("Throttle: Idle"));
        assert!(r.to_string().ends_with("Safe Zone"));
        assert_eq!(receiver_test(&ChannelSet::sticks(0.0, 0.0, 0.0, 95.0)).zone(), Some(ArmZone::Arm));
        assert_eq!(receiver_test(&ChannelSet::sticks(0.0, 0.0, 0.0, -95.0)).zone(), Some(ArmZone::Disarm));
        assert_eq!(receiver_test(&ChannelSet::sticks(30.0, 0.0, 0.0, 95.0)).zone(), Some(ArmZone::SafeZone));
        let full = receiver_test(&ChannelSet::sticks(95.0, 0.0, 0.0, 0.0));
        assert!(matches!(full, ReceiverReport::Live { throttle: ThrottleLabel::Full, .. }));
        let mid = receiver_test(&ChannelSet::sticks(50.0, 0.0, 0.0, 0.0));
        assert!(matches!(mid, ReceiverReport::Live { throttle: ThrottleLabel::Value(v), .. } if v == 50.0));
    }

    #[test]
    fn flags_excess_travel() {
        let r = receiver_test(&ChannelSet::sticks(50.0, 115.0, 0.0, -111.0));
        assert_eq!(r.over_limit(), &["roll", "yaw"]);
        assert!(r.to_string().contains("OVER"));
        assert!(receiver_test(&ChannelSet::sticks(50.0, 110.0, 0.0, 0.0)).over_limit().is_empty());
    }

    #[test]
    fn no_signal_after_timeout() {
        let ch = ChannelSet::neutral();
        assert_eq!(receiver_test_timed(None), ReceiverReport::NoSignal);
        assert_eq!(receiver_test_timed(Some((&ch, 0.15))), ReceiverReport::NoSignal);
        assert_eq!(receiver_test_timed(Some((&ch, 0.05))).zone(), Some(ArmZone::SafeZone));
        assert_eq!(ReceiverReport::NoSignal.to_string(), "No signal");
    }

    #[test]
    fn range_classification() {
        let mut rc = RangeCheck::default();
        rc.observe(&ChannelSet::sticks(0.0, 95.0, -50.0, 0.0));
        rc.observe(&ChannelSet::sticks(0.0, -80.0, 105.0, 112.0));
        assert_eq!(rc.status(), [RangeStatus::Ok, RangeStatus::High, RangeStatus::Violation]);
        assert_eq!(RangeCheck::default().status(), [RangeStatus::Short; 3]);
    }

    proptest! {
        #[test]
        fn zones_are_exclusive_and_total(thr in 0.0f64..110.0, yaw in -110.0f64..110.0) {
            let ch = ChannelSet::sticks(thr, 0.0, 0.0, yaw);
            let zone = ArmZone::of(&ch);
            let arm = ch.throttle_idle() && yaw >= ARM_YAW;
            let disarm = ch.throttle_idle() && yaw <= -ARM_YAW;
            prop_assert!(!(arm && disarm));
            prop_assert_eq!(zone == ArmZone::Arm, arm);
            prop_assert_eq!(zone == ArmZone::Disarm, disarm);
            prop_assert_eq!(zone == ArmZone::SafeZone, !arm && !disarm);
        }
    }
}
