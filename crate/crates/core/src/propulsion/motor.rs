use serde::{Deserialize, Serialize};

use crate::num::Real;

/// Lowest ESC command pulse, µs.
pub const PULSE_MIN_US: f64 = 1000.0;
/// Highest ESC command pulse, µs.
pub const PULSE_MAX_US: f64 = 2000.0;

/// Brushless motor with its propeller, A2212 1000 KV class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorSpec<T> {
    /// rpm per volt.
    pub kv: T,
    /// Static thrust at full throttle and nominal voltage, N.
    pub max_thrust: T,
    pub nominal_voltage: T,
}

impl<T: Real> Default for MotorSpec<T> {
    fn default() -> Self {
        Self {
            kv: T::lit(1000.0),
            max_thrust: T::lit(8.0),
            nominal_voltage: T::lit(11.1),
        }
    }
}

impl<T: Real> MotorSpec<T> {
    pub fn is_valid(&self) -> bool {
        self.kv.is_finite()
            && self.kv > T::zero()
            && self.max_thrust.is_finite()
            && self.max_thrust > T::zero()
            && self.nominal_voltage.is_finite()
            && self.nominal_voltage > T::zero()
    }

    /// Throttle fraction that yields `thrust` at the nominal voltage.
    pub fn throttle_for_thrust(&self, thrust: T) -> T {
        (thrust / self.max_thrust).max(T::zero()).sqrt()
    }

    /// Unloaded shaft speed proxy, rpm.
    pub fn rpm(&self, throttle: T, voltage: T) -> T {
        self.kv * voltage.max(T::zero()) * throttle.clamp_to(T::zero(), T::one())
    }
}

/// ESC pulse width to throttle fraction; 1000 µs is 0, 2000 µs is 1, clamped.
pub fn pwm_to_throttle<T: Real>(pulse_us: T) -> T {
    let lo = T::lit(PULSE_MIN_US);
    let span = T::lit(PULSE_MAX_US - PULSE_MIN_US);
    ((pulse_us - lo) / span).clamp_to(T::zero(), T::one())
}

/// Inverse of [`pwm_to_throttle`] on `[0, 1]`.
pub fn throttle_to_pwm<T: Real>(throttle: T) -> T {
    let lo = T::lit(PULSE_MIN_US);
    let span = T::lit(PULSE_MAX_US - PULSE_MIN_US);
    lo + span * throttle.clamp_to(T::zero(), T::one())
}

/// Static thrust: quadratic in throttle and in supply voltage, never above
/// `max_thrust`.
pub fn throttle_to_thrust<T: Real>(throttle: T, voltage: T, spec: &MotorSpec<T>) -> T {
    let throttle = throttle.clamp_to(T::zero(), T::one());
    let ratio = voltage.max(T::zero()) / spec.nominal_voltage;
    (spec.max_thrust * throttle * throttle * ratio * ratio).min(spec.max_thrust)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pulse_endpoints() {
        assert_eq!(pwm_to_throttle(1000.0), 0.0);
        assert_eq!(pwm_to_throttle(2000.0), 1.0);
        assert_abs_diff_eq!(pwm_to_throttle(1520.0), 0.52, epsilon = 1e-12);
        assert_eq!(pwm_to_throttle(900.0), 0.0);
        assert_eq!(pwm_to_throttle(2100.0), 1.0);
    }

    #[test]
    fn thrust_law() {
        let spec = MotorSpec::<f64>::default();
        assert_eq!(throttle_to_thrust(0.0, 11.1, &spec), 0.0);
        assert_eq!(throttle_to_thrust(1.0, 11.1, &spec), spec.max_thrust);
        assert_eq!(throttle_to_thrust(1.0, 12.6, &spec), spec.max_thrust);
        assert_abs_diff_eq!(throttle_to_thrust(0.5, 12.6, &spec), 2.0 * (12.6f64 / 11.1).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(throttle_to_thrust(0.5, 11.1, &spec), spec.max_thrust / 4.0, epsilon = 1e-12);
        assert_eq!(throttle_to_thrust(1.0, 0.0, &spec), 0.0);
        // Must beat the 450 gf per motor requirement.
        assert!(spec.max_thrust > 0.450 * 9.81);
    }

    proptest! {
        #[test]
        fn pulse_roundtrip(x in 0.0f64..=1.0, p in 1000.0f64..=2000.0) {
            prop_assert!((pwm_to_throttle(throttle_to_pwm(x)) - x).abs() <= 1e-12);
            prop_assert!((throttle_to_pwm(pwm_to_throttle(p)) - p).abs() <= 1e-9);
        }

        #[test]
        fn thrust_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, v1 in 0.0f64..13.0, v2 in 0.0f64..13.0) {
            let spec = MotorSpec::<f64>::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(throttle_to_thrust(lo, v1, &spec) <= throttle_to_thrust(hi, v1, &spec));
            let (vlo, vhi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(throttle_to_thrust(a, vlo, &spec) <= throttle_to_thrust(a, vhi, &spec));
        }
    }
}
