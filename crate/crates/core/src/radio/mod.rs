//! RC link model: channel normalisation, CPPM framing, the receiver test
//! screen and scripted channel traces.
//!
//! Channel units follow the KK2 receiver screen: roll, pitch and yaw span
//! about -100..+100, throttle 0..100. Positive roll is stick right,
//! positive pitch is stick forward, positive yaw is stick right.

mod cppm;
mod receiver;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cppm::{cppm_decode, cppm_encode, CppmFrame, FRAME_PERIOD_US, MAX_CPPM_CHANNELS};
pub use receiver::{
    receiver_test, receiver_test_timed, ArmZone, RangeCheck, RangeStatus, ReceiverReport,
    ThrottleLabel, NO_SIGNAL_TIMEOUT_S,
};
pub use trace::{ChannelTrace, TRACE_CSV_HEADER};

/// Throttle at or below this reads "Idle" and gates arming.
pub const IDLE_THROTTLE: f64 = 5.0;
/// Throttle above this reads "Full".
pub const FULL_THROTTLE: f64 = 90.0;
/// Yaw deflection that counts as full left/right for arming.
pub const ARM_YAW: f64 = 90.0;
/// Largest tolerated stick excursion.
pub const CHANNEL_LIMIT: f64 = 110.0;

pub const PULSE_MIN_US: f64 = 1000.0;
pub const PULSE_MAX_US: f64 = 2000.0;
pub const PULSE_CENTER_US: f64 = 1520.0;
const SYMMETRIC_UNITS_PER_US: f64 = 100.0 / (PULSE_CENTER_US - PULSE_MIN_US);
const THROTTLE_UNITS_PER_US: f64 = 100.0 / (PULSE_MAX_US - PULSE_MIN_US);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadioError {
    #[error("CPPM frame carries {0} pulses, expected 1..=8")]
    FrameArity(usize),
    #[error("channel `{channel}` value {value} outside its range")]
    OutOfRange { channel: &'static str, value: f64 },
    #[error("channel order is not a bijection: {0}")]
    BadOrder(String),
    #[error("invalid endpoint scale {0}")]
    BadEndpoint(f64),
    #[error("trace: {0}")]
    Trace(String),
}

/// Normalised stick positions as seen by the flight controller.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelSet {
    pub throttle: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub aux1: bool,
    /// Optional channels 6..8.
    #[serde(default)]
    pub extra: [Option<f64>; 3],
}

impl ChannelSet {
    /// Sticks centred, throttle at idle, switch off.
    pub fn neutral() -> Self {
        Self::default()
    }

    pub fn sticks(throttle: f64, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self {
            throttle,
            roll,
            pitch,
            yaw,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.throttle, self.roll, self.pitch, self.yaw]
            .iter()
            .chain(self.extra.iter().flatten())
            .all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        let check = |channel: &'static str, value: f64, lo: f64| {
            if value.is_finite() && value >= lo && value <= CHANNEL_LIMIT {
                Ok(())
            } else {
                Err(RadioError::OutOfRange { channel, value })
            }
        };
        check("throttle", self.throttle, 0.0)?;
        check("roll", self.roll, -CHANNEL_LIMIT)?;
        check("pitch", self.pitch, -CHANNEL_LIMIT)?;
        check("yaw", self.yaw, -CHANNEL_LIMIT)?;
        for v in self.extra.iter().flatten() {
            check("extra", *v, -CHANNEL_LIMIT)?;
        }
        Ok(())
    }

    /// Saturates every channel into its tolerated range; non-finite values
    /// become neutral.
    pub fn clamped(&self) -> Self {
        let sat = |v: f64, lo: f64| if v.is_finite() { v.clamp(lo, CHANNEL_LIMIT) } else { 0.0 };
        Self {
            throttle: sat(self.throttle, 0.0),
            roll: sat(self.roll, -CHANNEL_LIMIT),
            pitch: sat(self.pitch, -CHANNEL_LIMIT),
            yaw: sat(self.yaw, -CHANNEL_LIMIT),
            aux1: self.aux1,
            extra: self.extra.map(|e| e.map(|v| sat(v, -CHANNEL_LIMIT))),
        }
    }

    pub fn throttle_idle(&self) -> bool {
        self.throttle <= IDLE_THROTTLE
    }
}

/// Controller input a receiver channel is wired to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Function {
    Aileron,
    Elevator,
    Throttle,
    Rudder,
    Aux1,
    Aux2,
    Aux3,
    Aux4,
}

impl Function {
    pub const ALL: [Function; 8] = [
        Function::Aileron,
        Function::Elevator,
        Function::Throttle,
        Function::Rudder,
        Function::Aux1,
        Function::Aux2,
        Function::Aux3,
        Function::Aux4,
    ];

    /// Receiver wiring order: aileron, elevator, throttle, rudder, AUX.
    pub const WIRING: [Function; 5] = [
        Function::Aileron,
        Function::Elevator,
        Function::Throttle,
        Function::Rudder,
        Function::Aux1,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn is_throttle(self) -> bool {
        self == Function::Throttle
    }

    pub fn name(self) -> &'static str {
        match self {
            Function::Aileron => "aileron",
            Function::Elevator => "elevator",
            Function::Throttle => "throttle",
            Function::Rudder => "rudder",
            Function::Aux1 => "aux1",
            Function::Aux2 => "aux2",
            Function::Aux3 => "aux3",
            Function::Aux4 => "aux4",
        }
    }
}

/// Transmitter-side shaping of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCal {
    pub reversed: bool,
    /// Additive trim, channel units.
    pub trim: f64,
    /// Endpoint (travel) scale, > 0.
    pub endpoint: f64,
}

impl Default for ChannelCal {
    fn default() -> Self {
        Self {
            reversed: false,
            trim: 0.0,
            endpoint: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Function carried by each receiver channel / CPPM slot, in order.
    pub order: Vec<Function>,
    /// Calibration per function, indexed in [`Function::ALL`] order.
    pub cal: [ChannelCal; 8],
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            order: Function::WIRING.to_vec(),
            cal: [ChannelCal::default(); 8],
        }
    }
}

impl RadioConfig {
    pub fn cal(&self, f: Function) -> &ChannelCal {
        &self.cal[f.index()]
    }

    pub fn cal_mut(&mut self, f: Function) -> &mut ChannelCal {
        &mut self.cal[f.index()]
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        if self.order.is_empty() || self.order.len() > MAX_CPPM_CHANNELS {
            return Err(RadioError::BadOrder(format!("{} channels", self.order.len())));
        }
        for (i, f) in self.order.iter().enumerate() {
            if self.order[..i].contains(f) {
                return Err(RadioError::BadOrder(format!("`{}` mapped twice", f.name())));
            }
        }
        for c in &self.cal {
            if !(c.endpoint.is_finite() && c.endpoint > 0.0) {
                return Err(RadioError::BadEndpoint(c.endpoint));
            }
        }
        Ok(())
    }

    /// Channel-unit interval reachable with pulses in [1000, 2000] µs.
    pub fn encodable_range(&self, f: Function) -> (f64, f64) {
        let a = self.pulse_to_units(f, PULSE_MIN_US);
        let b = self.pulse_to_units(f, PULSE_MAX_US);
        (a.min(b), a.max(b))
    }

    /// Pulse width to channel units: linear map, reversal, trim, endpoint.
    pub fn pulse_to_units(&self, f: Function, pulse_us: f64) -> f64 {
        let cal = self.cal(f);
        let raw = if f.is_throttle() {
            (pulse_us - PULSE_MIN_US) * THROTTLE_UNITS_PER_US
        } else {
            (pulse_us - PULSE_CENTER_US) * SYMMETRIC_UNITS_PER_US
        };
        let shaped = if cal.reversed { reverse(f, raw) } else { raw };
        (shaped + cal.trim) * cal.endpoint
    }

    /// Inverse of [`RadioConfig::pulse_to_units`], unquantised and unclamped.
    pub fn units_to_pulse(&self, f: Function, units: f64) -> f64 {
        let cal = self.cal(f);
        let shaped = units / cal.endpoint - cal.trim;
        let raw = if cal.reversed { reverse(f, shaped) } else { shaped };
        if f.is_throttle() {
            PULSE_MIN_US + raw / THROTTLE_UNITS_PER_US
        } else {
            PULSE_CENTER_US + raw / SYMMETRIC_UNITS_PER_US
        }
    }
}

// Symmetric channels flip sign; throttle mirrors across its 0..100 travel.
fn reverse(f: Function, v: f64) -> f64 {
    if f.is_throttle() {
        100.0 - v
    } else {
        -v
    }
}

fn assign(ch: &mut ChannelSet, f: Function, v: f64) {
    match f {
        Function::Aileron => ch.roll = v,
        Function::Elevator => ch.pitch = v,
        Function::Throttle => ch.throttle = v,
        Function::Rudder => ch.yaw = v,
        Function::Aux1 => ch.aux1 = v > 0.0,
        Function::Aux2 => ch.extra[0] = Some(v),
        Function::Aux3 => ch.extra[1] = Some(v),
        Function::Aux4 => ch.extra[2] = Some(v),
    }
}

fn value_of(ch: &ChannelSet, f: Function) -> Option<f64> {
    match f {
        Function::Aileron => Some(ch.roll),
        Function::Elevator => Some(ch.pitch),
        Function::Throttle => Some(ch.throttle),
        Function::Rudder => Some(ch.yaw),
        Function::Aux1 => Some(if ch.aux1 { 100.0 } else { -100.0 }),
        Function::Aux2 => ch.extra[0],
        Function::Aux3 => ch.extra[1],
        Function::Aux4 => ch.extra[2],
    }
}

/// Converts raw receiver pulses (one per channel in `cfg.order`) into a
/// [`ChannelSet`]. Channels without a pulse stay neutral.
pub fn normalize(raw_us: &[f64], cfg: &RadioConfig) -> ChannelSet {
    let mut ch = ChannelSet::neutral();
    for (&f, &pulse) in cfg.order.iter().zip(raw_us) {
        assign(&mut ch, f, cfg.pulse_to_units(f, pulse));
    }
    ch
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn center_and_endpoints() {
        let cfg = RadioConfig::default();
        let ch = normalize(&[1520.0, 1520.0, 1000.0, 1520.0, 1000.0], &cfg);
        assert_eq!(ch, ChannelSet::neutral());
        let ch = normalize(&[2000.0, 1000.0, 2000.0, 1520.0, 2000.0], &cfg);
        assert!((90.0..=100.0).contains(&ch.roll), "roll {}", ch.roll);
        assert_eq!(ch.pitch, -100.0);
        assert_eq!(ch.throttle, 100.0);
        assert!(ch.aux1);
    }

    #[test]
    fn reversal_negates() {
        let mut cfg = RadioConfig::default();
        let plain = normalize(&[1733.0], &cfg).roll;
        cfg.cal_mut(Function::Aileron).reversed = true;
        assert_eq!(normalize(&[1733.0], &cfg).roll, -plain);
    }

    #[test]
    fn trim_and_endpoint() {
        let mut cfg = RadioConfig::default();
        *cfg.cal_mut(Function::Rudder) = ChannelCal {
            reversed: false,
            trim: -2.0,
            endpoint: 1.05,
        };
        let ch = normalize(&[1520.0, 1520.0, 1000.0, 1530.4], &cfg);
        assert_abs_diff_eq!(ch.yaw, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn order_follows_wiring_table() {
        assert_eq!(
            RadioConfig::default().order,
            vec![
                Function::Aileron,
                Function::Elevator,
                Function::Throttle,
                Function::Rudder,
                Function::Aux1
            ]
        );
        let mut cfg = RadioConfig::default();
        cfg.order[1] = Function::Aileron;
        assert!(matches!(cfg.validate(), Err(RadioError::BadOrder(_))));
    }

    #[test]
    fn channel_set_validation() {
        assert!(ChannelSet::sticks(50.0, 105.0, -110.0, 0.0).validate().is_ok());
        assert!(ChannelSet::sticks(50.0, 115.0, 0.0, 0.0).validate().is_err());
        assert!(ChannelSet::sticks(-1.0, 0.0, 0.0, 0.0).validate().is_err());
        let c = ChannelSet::sticks(120.0, -130.0, f64::NAN, 3.0).clamped();
        assert_eq!((c.throttle, c.roll, c.pitch, c.yaw), (110.0, -110.0, 0.0, 3.0));
    }

    proptest! {
        #[test]
        fn normalize_is_affine(p1 in 900.0f64..2100.0, p2 in 900.0f64..2100.0, lambda in 0.0f64..1.0,
                               rev in any::<bool>(), trim in -10.0f64..10.0, ep in 0.5f64..1.5) {
            let mut cfg = RadioConfig::default();
            *cfg.cal_mut(Function::Elevator) = ChannelCal { reversed: rev, trim, endpoint: ep };
            let f = |p: f64| cfg.pulse_to_units(Function::Elevator, p);
            let mid = lambda * p1 + (1.0 - lambda) * p2;
            prop_assert!((f(mid) - (lambda * f(p1) + (1.0 - lambda) * f(p2))).abs() < 1e-9);
            prop_assert!((cfg.units_to_pulse(Function::Elevator, f(p1)) - p1).abs() < 1e-9);
        }

        #[test]
        fn double_reversal_is_identity(p in 1000.0f64..2000.0) {
            for f in Function::ALL {
                let plain = RadioConfig::default().pulse_to_units(f, p);
                let twice = reverse(f, reverse(f, plain));
                prop_assert!((twice - plain).abs() < 1e-12);
            }
        }
    }
}
