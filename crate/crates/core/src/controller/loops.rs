//! Signal-path stages: PI loop, complementary filter, mixer, servo filter,
//! height dampening and stick scaling.

use serde::{Deserialize, Serialize};

use super::config::{ControllerConfig, HEIGHT_DAMP_UNIT, STANDARD_GRAVITY};
use crate::dynamics::Attitude;
use crate::num::Real;

/// Gyro and accelerometer sample in body axes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorReading<T> {
    /// Roll, pitch, yaw rates, rad/s.
    pub gyro: [T; 3],
    /// Specific force, m/s². Reads `(0, 0, g)` when level and at rest.
    pub accel: [T; 3],
}

impl<T: Real> SensorReading<T> {
    pub fn is_finite(&self) -> bool {
        self.gyro.iter().chain(self.accel.iter()).all(|v| v.is_finite())
    }

    /// Level and still.
    pub fn at_rest(g: T) -> Self {
        Self {
            gyro: [T::zero(); 3],
            accel: [T::zero(), T::zero(), g],
        }
    }
}

/// Physical PI gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGains<T> {
    pub kp: T,
    pub ki: T,
    pub limit: T,
}

impl<T: Real> PiGains<T> {
    /// Converts 0–200 menu values to gains: `k = setting/100 · unit`.
    pub fn from_setting(p: u16, i: u16, limit: T, p_unit: T, i_unit: T) -> Self {
        let hundred = T::lit(100.0);
        Self {
            kp: T::lit(f64::from(p)) / hundred * p_unit,
            ki: T::lit(f64::from(i)) / hundred * i_unit,
            limit,
        }
    }
}

/// One PI update. Returns `(output, integrator')` where the integrator holds
/// the clamped running sum of `error·dt`.
pub fn pi_step<T: Real>(setpoint: T, measured: T, gains: &PiGains<T>, integrator: T, dt: T) -> (T, T) {
    let error = setpoint - measured;
    let limit = gains.limit.abs();
    let integ = (integrator + error * dt).clamp_to(-limit, limit);
    (gains.kp * error + gains.ki * integ, integ)
}

/// Filter time constant giving a blend of 0.98 at a 2 ms step.
pub const ESTIMATOR_TAU_S: f64 = 0.098;

/// Gyro weight for step `dt`: `τ / (τ + dt)`.
pub fn blend_factor<T: Real>(dt: T) -> T {
    let tau = T::lit(ESTIMATOR_TAU_S);
    tau / (tau + dt)
}

/// Tilt implied by the gravity direction in an accelerometer sample.
pub fn accel_tilt<T: Real>(accel: &[T; 3]) -> (T, T) {
    let [fx, fy, fz] = *accel;
    let roll = fy.atan2(fz);
    let pitch = (-fx).atan2((fy * fy + fz * fz).sqrt());
    (roll, pitch)
}

/// Complementary filter. `alpha` is the gyro weight; 1 gives pure gyro
/// integration. Yaw is gyro-only.
pub fn attitude_estimate<T: Real>(prev: &Attitude<T>, sensors: &SensorReading<T>, dt: T, alpha: T) -> Attitude<T> {
    let gyro_roll = prev.roll + sensors.gyro[0] * dt;
    let gyro_pitch = prev.pitch + sensors.gyro[1] * dt;
    let yaw = prev.yaw + sensors.gyro[2] * dt;
    if alpha >= T::one() {
        return Attitude::new(gyro_roll, gyro_pitch, yaw);
    }
    let (acc_roll, acc_pitch) = accel_tilt(&sensors.accel);
    let beta = T::one() - alpha;
    Attitude::new(
        alpha * gyro_roll + beta * acc_roll,
        alpha * gyro_pitch + beta * acc_pitch,
        yaw,
    )
}

/// X-layout mix before clamping. Motors: 1 front-left CW, 2 front-right CCW,
/// 3 back-right CW, 4 back-left CCW.
pub fn mix_raw<T: Real>(t: T, r: T, p: T, y: T) -> [T; 4] {
    [t + r + p - y, t - r + p + y, t - r - p - y, t + r - p + y]
}

/// [`mix_raw`] clamped to `[0, 1]`.
pub fn mixer<T: Real>(t: T, r: T, p: T, y: T) -> [T; 4] {
    mix_raw(t, r, p, y).map(|m| m.clamp_to(T::zero(), T::one()))
}

/// First-order low-pass with time constant `filter_ms`, discretised exactly
/// for a held input. 0 ms passes the input through.
pub fn servo_filter<T: Real>(prev: T, input: T, dt: T, filter_ms: u16) -> T {
    if filter_ms == 0 {
        return input;
    }
    let tau = T::lit(f64::from(filter_ms)) / T::lit(1000.0);
    let k = T::one() - (-dt / tau).exp();
    prev + (input - prev) * k
}

/// Throttle correction opposing vertical acceleration. `accel_z` is the body
/// z specific force.
pub fn height_dampening<T: Real>(accel_z: T, cfg: &ControllerConfig) -> T {
    if cfg.height_damp == 0 {
        return T::zero();
    }
    let gain = T::lit(f64::from(cfg.height_damp)) / T::lit(100.0) * T::lit(HEIGHT_DAMP_UNIT);
    let limit = T::lit(f64::from(cfg.height_damp_limit)) / T::lit(100.0);
    (-gain * (accel_z - T::lit(STANDARD_GRAVITY))).clamp_to(-limit, limit)
}

pub fn stick_scale<T: Real>(value: T, scaling: u16) -> T {
    if scaling == 100 {
        return value;
    }
    value * T::lit(f64::from(scaling)) / T::lit(100.0)
}
