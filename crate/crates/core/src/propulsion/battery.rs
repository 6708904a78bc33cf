//! LiPo pack model: Peukert sizing, discharge stepping and the low-voltage alarm.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

/// Per-cell open-circuit voltage when full.
pub const CELL_FULL_V: f64 = 4.2;
/// Per-cell open-circuit voltage at half charge (nominal 3.7 V).
pub const CELL_MID_V: f64 = 3.7;
/// Per-cell open-circuit voltage when empty.
pub const CELL_EMPTY_V: f64 = 3.0;
/// Pack voltage at or below which the motors can no longer hold the craft up.
pub const BROWNOUT_VOLTAGE: f64 = 7.5;
/// Total hover draw used for pack sizing, A.
pub const HOVER_CURRENT_A: f64 = 22.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatteryError {
    #[error("voltage must be positive, got {0} V")]
    NonPositiveVoltage(f64),
    #[error("invalid battery field `{0}`")]
    Invalid(&'static str),
}

/// Charge state of a series LiPo pack. Capacities are in ampere-hours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState<T> {
    pub cells: u32,
    pub capacity: T,
    pub remaining: T,
    pub peukert_k: T,
    /// Terminal voltage, V.
    pub voltage: T,
    /// Pack internal resistance, Ω.
    pub internal_resistance: T,
}

impl<T: Real> Default for BatteryState<T> {
    fn default() -> Self {
        Self::full(3, T::lit(3.7))
    }
}

impl<T: Real> BatteryState<T> {
    /// Fully charged pack at rest.
    pub fn full(cells: u32, capacity: T) -> Self {
        Self {
            cells,
            capacity,
            remaining: capacity,
            peukert_k: T::one(),
            voltage: open_circuit_voltage(T::one(), cells),
            internal_resistance: T::lit(0.02),
        }
    }

    pub fn state_of_charge(&self) -> T {
        if self.capacity > T::zero() {
            (self.remaining / self.capacity).clamp_to(T::zero(), T::one())
        } else {
            T::zero()
        }
    }

    pub fn is_depleted(&self) -> bool {
        self.remaining <= T::zero()
    }

    pub fn validate(&self) -> Result<(), BatteryError> {
        let finite_non_negative = |v: T| v.is_finite() && v >= T::zero();
        if self.cells == 0 {
            return Err(BatteryError::Invalid("cells"));
        }
        if !(self.capacity.is_finite() && self.capacity > T::zero()) {
            return Err(BatteryError::Invalid("capacity"));
        }
        if !finite_non_negative(self.remaining) || self.remaining > self.capacity {
            return Err(BatteryError::Invalid("remaining"));
        }
        if !(self.peukert_k.is_finite() && self.peukert_k >= T::one()) {
            return Err(BatteryError::Invalid("peukert_k"));
        }
        if !finite_non_negative(self.voltage) {
            return Err(BatteryError::Invalid("voltage"));
        }
        if !finite_non_negative(self.internal_resistance) {
            return Err(BatteryError::Invalid("internal_resistance"));
        }
        Ok(())
    }
}

/// Piecewise-linear open-circuit voltage: 4.2 V/cell full, 3.7 V/cell at
/// half charge, 3.0 V/cell empty.
pub fn open_circuit_voltage<T: Real>(state_of_charge: T, cells: u32) -> T {
    let soc = state_of_charge.clamp_to(T::zero(), T::one());
    let half = T::lit(0.5);
    let per_cell = if soc >= half {
        T::lit(CELL_MID_V) + (soc - half) / half * T::lit(CELL_FULL_V - CELL_MID_V)
    } else {
        T::lit(CELL_EMPTY_V) + soc / half * T::lit(CELL_MID_V - CELL_EMPTY_V)
    };
    per_cell * T::lit(f64::from(cells))
}

/// `I = P / V`.
pub fn required_current<T: Real>(power: T, voltage: T) -> Result<T, BatteryError> {
    if !(voltage.is_finite() && voltage > T::zero()) {
        return Err(BatteryError::NonPositiveVoltage(voltage.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(power / voltage)
}

/// Capacity in Ah needed to supply `current` amperes for `duration_min`
/// minutes under Peukert's law with exponent `k`.
pub fn peukert_capacity<T: Real>(duration_min: T, current: T, k: T) -> T {
    duration_min * current.powf(k) / T::lit(60.0)
}

/// Discharges the pack at a constant `current` for `dt` seconds.
pub fn battery_step<T: Real>(b: &BatteryState<T>, current: T, dt: T) -> BatteryState<T> {
    if current <= T::zero() {
        return *b;
    }
    let drawn = current.powf(b.peukert_k) * dt / T::lit(3600.0);
    let remaining = (b.remaining - drawn).max(T::zero());
    let mut next = BatteryState { remaining, ..*b };
    let ocv = open_circuit_voltage(next.state_of_charge(), b.cells);
    next.voltage = (ocv - current * b.internal_resistance).max(T::zero());
    next
}

/// KK2-style alarm: set-point in tenths of a volt, 0 disables it.
pub fn low_voltage_alarm<T: Real>(voltage: T, setpoint_tenths: u32) -> bool {
    setpoint_tenths > 0 && voltage <= T::lit(f64::from(setpoint_tenths)) / T::lit(10.0)
}

/// Beep period: 2.0 s at `start_voltage` and above, shrinking linearly to
/// 0.2 s at the set-point.
pub fn alarm_beep_interval<T: Real>(voltage: T, setpoint: T, start_voltage: T) -> T {
    let long = T::lit(2.0);
    let short = T::lit(0.2);
    let span = start_voltage - setpoint;
    if span <= T::zero() {
        return if voltage > setpoint { long } else { short };
    }
    let frac = ((voltage - setpoint) / span).clamp_to(T::zero(), T::one());
    short + (long - short) * frac
}
