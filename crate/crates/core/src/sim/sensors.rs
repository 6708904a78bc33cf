//! IMU model: true rates and specific force plus white noise and a
//! motor-synchronous vibration tone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::controller::SensorReading;
use crate::dynamics::{rotation_matrix, RigidBodyState};

/// Gyro pickup of the vibration tone, rad/s per m/s² of vibration amplitude.
pub const GYRO_VIBRATION_COUPLING: f64 = 0.01;

/// Noise and vibration levels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSpec {
    /// Gyro white noise, rad/s RMS.
    pub gyro_noise_rads: f64,
    /// Accelerometer white noise, m/s² RMS.
    pub accel_noise_ms2: f64,
    /// Vibration amplitude, m/s².
    pub vibration_ms2: f64,
}

impl SensorSpec {
    pub fn noise_free() -> Self {
        Self::default()
    }

    /// Reference noise and vibration levels for a 450-class frame on soft
    /// mounts: 0.01 rad/s gyro, 0.2 m/s² accelerometer, 1 m/s² vibration.
    pub fn typical() -> Self {
        Self { gyro_noise_rads: 0.01, accel_noise_ms2: 0.2, vibration_ms2: 1.0 }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.gyro_noise_rads) {
            return Err("sensors.gyro_noise_rads");
        }
        if !ok(self.accel_noise_ms2) {
            return Err("sensors.accel_noise_ms2");
        }
        if !ok(self.vibration_ms2) {
            return Err("sensors.vibration_ms2");
        }
        Ok(())
    }
}

/// Seeded sensor model. The vibration phase advances with the motor speed.
#[derive(Debug, Clone)]
pub struct SensorModel {
    spec: SensorSpec,
    rng: ChaCha8Rng,
    gyro_noise: Option<Normal<f64>>,
    accel_noise: Option<Normal<f64>>,
    phase: f64,
}

// Per-axis phase offsets so the three axes are not identical.
const AXIS_PHASE: [f64; 3] = [0.0, 2.1, 4.2];

impl SensorModel {
    pub fn new(spec: SensorSpec, seed: u64) -> Self {
        let normal = |sd: f64| (sd > 0.0).then(|| Normal::new(0.0, sd).expect("finite sd"));
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
            gyro_noise: normal(spec.gyro_noise_rads),
            accel_noise: normal(spec.accel_noise_ms2),
            phase: 0.0,
        }
    }

    pub fn spec(&self) -> &SensorSpec {
        &self.spec
    }

    /// Samples the IMU. `accel_world` is the inertial acceleration of the
    /// body, `gravity` the field strength, `motor_rpm` the mean motor speed
    /// over the last `dt` seconds.
    pub fn sample(
        &mut self,
        state: &RigidBodyState<f64>,
        accel_world: [f64; 3],
        gravity: f64,
        motor_rpm: f64,
        dt: f64,
    ) -> SensorReading<f64> {
        let r = rotation_matrix(&state.attitude);
        let f = [accel_world[0], accel_world[1], accel_world[2] + gravity];
        // Body frame: Rᵀ·f.
        let mut accel = [0.0; 3];
        for (i, a) in accel.iter_mut().enumerate() {
            *a = r[0][i] * f[0] + r[1][i] * f[1] + r[2][i] * f[2];
        }
        let mut gyro = state.rates;

        self.phase = (self.phase + std::f64::consts::TAU * motor_rpm.max(0.0) / 60.0 * dt) % std::f64::consts::TAU;
        let amp = self.spec.vibration_ms2;
        if amp > 0.0 {
            for axis in 0..3 {
                let tone = (self.phase + AXIS_PHASE[axis]).sin();
                accel[axis] += amp * tone;
                gyro[axis] += amp * GYRO_VIBRATION_COUPLING * tone;
            }
        }
        if let Some(n) = self.gyro_noise {
            for g in &mut gyro {
                *g += n.sample(&mut self.rng);
            }
        }
        if let Some(n) = self.accel_noise {
            for a in &mut accel {
                *a += n.sample(&mut self.rng);
            }
        }
        SensorReading { gyro, accel }
    }
}
