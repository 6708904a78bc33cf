//! Constant-draw discharge to the alarm and to empty.

use serde::{Deserialize, Serialize};

use crate::propulsion::{battery_step, low_voltage_alarm, BatteryState, BROWNOUT_VOLTAGE};

/// Integration step, s.
pub const ENDURANCE_DT_S: f64 = 0.1;
/// Give up after this long, s.
const MAX_SIM_S: f64 = 24.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnduranceReport {
    /// First time the voltage is at or below the alarm set-point, s.
    pub alarm_s: Option<f64>,
    /// Time the pack runs empty or browns out, whichever is first, s.
    pub depletion_s: f64,
    pub brownout: bool,
}

impl EnduranceReport {
    pub fn alarm_min(&self) -> Option<f64> {
        self.alarm_s.map(|s| s / 60.0)
    }

    pub fn depletion_min(&self) -> f64 {
        self.depletion_s / 60.0
    }
}

/// Discharges a full 3S pack of `capacity_ah` at `draw_a` with Peukert
/// exponent `k`, alarm at the default 10.8 V.
pub fn endurance_sim(capacity_ah: f64, draw_a: f64, k: f64) -> EnduranceReport {
    let pack = BatteryState { peukert_k: k, ..BatteryState::full(3, capacity_ah) };
    endurance_sim_with(&pack, draw_a, 108)
}

/// Discharges `pack` at a constant `draw_a`. Crossing times are
/// interpolated within the step.
pub fn endurance_sim_with(pack: &BatteryState<f64>, draw_a: f64, alarm_tenths: u32) -> EnduranceReport {
    let mut b = *pack;
    let dt = ENDURANCE_DT_S;
    let drawn_per_step = draw_a.powf(b.peukert_k) * dt / 3600.0;
    let mut alarm_s = None;
    let mut t = 0.0;
    let mut steps = 0u64;
    loop {
        let prev = b;
        b = battery_step(&b, draw_a, dt);
        steps += 1;
        let t_next = steps as f64 * dt;
        let v_cross = |level: f64| {
            let span = prev.voltage - b.voltage;
            if span > 0.0 {
                t + dt * ((prev.voltage - level) / span).clamp(0.0, 1.0)
            } else {
                t_next
            }
        };
        if alarm_s.is_none() && low_voltage_alarm(b.voltage, alarm_tenths) {
            alarm_s = Some(v_cross(f64::from(alarm_tenths) / 10.0));
        }
        if b.voltage <= BROWNOUT_VOLTAGE {
            return EnduranceReport { alarm_s, depletion_s: v_cross(BROWNOUT_VOLTAGE), brownout: true };
        }
        if b.is_depleted() {
            let depletion_s = t + dt * (prev.remaining / drawn_per_step).min(1.0);
            return EnduranceReport { alarm_s, depletion_s, brownout: false };
        }
        if t_next >= MAX_SIM_S {
            return EnduranceReport { alarm_s, depletion_s: f64::INFINITY, brownout: false };
        }
        t = t_next;
    }
}
