//! Rigid-body quadrotor equations of motion and the fixed-step integrator.
//!
//! Frame conventions: world frame is x forward, y left, z up. Body roll `φ`
//! is about x (positive = right side down), pitch `θ` about y (positive =
//! nose down, thrust tilts toward +x) and yaw `ψ` about z (positive =
//! counter-clockwise seen from above). The rotation from body to world is
//! `R = Rz(ψ)·Ry(θ)·Rx(φ)`.
//!
//! Motors are numbered 1 front-left, 2 front-right, 3 back-right and
//! 4 back-left. Motors 1 and 3 spin clockwise.
//!
//! Two model variants are available. [`ModelVariant::Corrected`] is the
//! standard quadrotor model and the default. [`ModelVariant::AsPrinted`]
//! keeps the historical equation set term for term, including its defects
//! (it cannot hold a hover), and exists for unit-level fidelity checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

/// Largest step accepted by [`step`].
pub const MAX_STEP_S: f64 = 0.05;
/// Default integration step.
pub const DEFAULT_STEP_S: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("time step {0} s outside (0, {MAX_STEP_S}]")]
    InvalidStep(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("motor {index} thrust {value} N is negative")]
    NegativeThrust { index: usize, value: f64 },
    #[error("target coincides with the current position, bearing undefined")]
    CoincidentTarget,
    #[error("invalid airframe parameter `{0}`")]
    InvalidAirframe(&'static str),
}

/// Euler angles in radians, stored unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude<T> {
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> Attitude<T> {
    pub fn new(roll: T, pitch: T, yaw: T) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn level() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.roll.is_finite() && self.pitch.is_finite() && self.yaw.is_finite()
    }
}

/// Position, velocity, attitude and body rates of the craft.
///
/// `rates` are ordered roll, pitch, yaw.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidBodyState<T> {
    pub position: [T; 3],
    pub velocity: [T; 3],
    pub attitude: Attitude<T>,
    pub rates: [T; 3],
}

impl<T: Real> RigidBodyState<T> {
    /// Craft at rest at the origin, level.
    pub fn at_rest() -> Self {
        let z = T::zero();
        Self {
            position: [z; 3],
            velocity: [z; 3],
            attitude: Attitude::level(),
            rates: [z; 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.attitude.is_finite()
            && self.rates.iter().all(|v| v.is_finite())
    }

    /// The twelve state components in a fixed order: position, velocity,
    /// attitude (roll, pitch, yaw), rates.
    pub fn components(&self) -> [T; 12] {
        let p = self.position;
        let v = self.velocity;
        let a = self.attitude;
        let w = self.rates;
        [
            p[0], p[1], p[2], v[0], v[1], v[2], a.roll, a.pitch, a.yaw, w[0], w[1], w[2],
        ]
    }

    pub fn from_components(c: [T; 12]) -> Self {
        Self {
            position: [c[0], c[1], c[2]],
            velocity: [c[3], c[4], c[5]],
            attitude: Attitude::new(c[6], c[7], c[8]),
            rates: [c[9], c[10], c[11]],
        }
    }
}

/// Physical parameters of the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirframeParams<T> {
    /// Mass, kg.
    pub mass: T,
    /// Gravitational acceleration, m/s².
    pub gravity: T,
    /// Half arm length, m.
    pub arm_length: T,
    /// Roll, pitch and yaw inertias, kg·m².
    pub inertia: [T; 3],
    /// Force to moment scaling factor, m.
    pub moment_factor: T,
    /// Translational drag (K1..K3), kg/s.
    pub linear_drag: [T; 3],
    /// Rotational drag (K4..K6), kg·m²/s.
    pub angular_drag: [T; 3],
}

impl<T: Real> Default for AirframeParams<T> {
    fn default() -> Self {
        let z = T::zero();
        Self {
            mass: T::lit(1.5),
            gravity: T::lit(9.81),
            arm_length: T::lit(0.225),
            inertia: [T::lit(0.01), T::lit(0.01), T::lit(0.02)],
            moment_factor: T::lit(0.05),
            linear_drag: [z; 3],
            angular_drag: [z; 3],
        }
    }
}

impl<T: Real> AirframeParams<T> {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        let non_negative = |v: T| v.is_finite() && v >= T::zero();
        if !positive(self.mass) {
            return Err(DynamicsError::InvalidAirframe("mass"));
        }
        if !positive(self.gravity) {
            return Err(DynamicsError::InvalidAirframe("gravity"));
        }
        if !positive(self.arm_length) {
            return Err(DynamicsError::InvalidAirframe("arm_length"));
        }
        if !self.inertia.iter().all(|&i| positive(i)) {
            return Err(DynamicsError::InvalidAirframe("inertia"));
        }
        if !non_negative(self.moment_factor) {
            return Err(DynamicsError::InvalidAirframe("moment_factor"));
        }
        if !self.linear_drag.iter().all(|&k| non_negative(k)) {
            return Err(DynamicsError::InvalidAirframe("linear_drag"));
        }
        if !self.angular_drag.iter().all(|&k| non_negative(k)) {
            return Err(DynamicsError::InvalidAirframe("angular_drag"));
        }
        Ok(())
    }

    /// Thrust each motor has to produce for the craft to hover.
    pub fn hover_thrust_per_motor(&self) -> T {
        self.mass * self.gravity / T::lit(4.0)
    }
}

/// Mass-normalised collective thrust (`u1`, m/s²) and the three angular
/// channel inputs (`u2` roll, `u3` pitch, `u4` yaw; rad/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInputs<T> {
    pub u1: T,
    pub u2: T,
    pub u3: T,
    pub u4: T,
}

/// Per-motor thrust in newtons, indexed front-left, front-right, back-right,
/// back-left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotorThrusts<T>(pub [T; 4]);

impl<T: Real> MotorThrusts<T> {
    pub fn uniform(thrust: T) -> Self {
        Self([thrust; 4])
    }

    pub fn total(&self) -> T {
        self.0.iter().fold(T::zero(), |acc, &t| acc + t)
    }

    pub fn check(&self) -> Result<(), DynamicsError> {
        for (index, &value) in self.0.iter().enumerate() {
            if !value.is_finite() {
                return Err(DynamicsError::NonFinite("motor thrusts"));
            }
            if value < T::zero() {
                return Err(DynamicsError::NegativeThrust {
                    index: index + 1,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    AsPrinted,
    #[default]
    Corrected,
}

impl std::str::FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "as-printed" | "as_printed" => Ok(Self::AsPrinted),
            other => Err(format!("unknown model variant `{other}`")),
        }
    }
}

/// Navigation target in world coordinates, metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Waypoint<T> {
    pub target: [T; 3],
}

/// Body-to-world rotation `Rz(ψ)·Ry(θ)·Rx(φ)`, row-major.
pub fn rotation_matrix<T: Real>(att: &Attitude<T>) -> [[T; 3]; 3] {
    let (sr, cr) = att.roll.sin_cos();
    let (sp, cp) = att.pitch.sin_cos();
    let (sy, cy) = att.yaw.sin_cos();
    [
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ]
}

/// Maps motor thrusts to the four control inputs.
pub fn control_inputs<T: Real>(
    th: &MotorThrusts<T>,
    p: &AirframeParams<T>,
    variant: ModelVariant,
) -> ControlInputs<T> {
    let [t1, t2, t3, t4] = th.0;
    let l = p.arm_length;
    let [i1, i2, i3] = p.inertia;
    let u1 = (t1 + t2 + t3 + t4) / p.mass;
    match variant {
        ModelVariant::AsPrinted => ControlInputs {
            u1,
            u2: l * (-t1 - t2 + t3 + t4) / i1,
            u3: l * (-t1 + t2 + t3 - t4) / i2,
            u4: l * (t1 + t2 + t3 + t4) / i3,
        },
        // Roll: left pair minus right pair. Pitch (nose down): rear pair minus
        // front pair. Yaw: reaction torque of the clockwise pair {1, 3}.
        ModelVariant::Corrected => ControlInputs {
            u1,
            u2: l * (t1 - t2 - t3 + t4) / i1,
            u3: l * (-t1 - t2 + t3 + t4) / i2,
            u4: p.moment_factor * (t1 - t2 + t3 - t4) / i3,
        },
    }
}

/// World-frame linear acceleration for collective input `u1`.
pub fn translational_accel<T: Real>(
    s: &RigidBodyState<T>,
    u1: T,
    p: &AirframeParams<T>,
    variant: ModelVariant,
) -> [T; 3] {
    let (sr, cr) = s.attitude.roll.sin_cos();
    let (sp, cp) = s.attitude.pitch.sin_cos();
    let (sy, cy) = s.attitude.yaw.sin_cos();
    let [k1, k2, k3] = p.linear_drag;
    let [vx, vy, vz] = s.velocity;
    let m = p.mass;
    let (ax, ay, az) = match variant {
        ModelVariant::AsPrinted => (
            u1 * (cr * sp * cy + sr * sp),
            u1 * (sr * sp * cy + cr * sp),
            u1 * (cr * cy) - p.gravity,
        ),
        ModelVariant::Corrected => (
            u1 * (cr * sp * cy + sr * sy),
            u1 * (cr * sp * sy - sr * cy),
            u1 * (cr * cp) - p.gravity,
        ),
    };
    [ax - k1 * vx / m, ay - k2 * vy / m, az - k3 * vz / m]
}

/// Angular accelerations (roll, pitch, yaw).
pub fn angular_accel<T: Real>(
    s: &RigidBodyState<T>,
    u: &ControlInputs<T>,
    p: &AirframeParams<T>,
) -> [T; 3] {
    let l = p.arm_length;
    let [k4, k5, k6] = p.angular_drag;
    let [i1, i2, i3] = p.inertia;
    let [wr, wp, wy] = s.rates;
    [
        u.u2 - l * k4 * wr / i1,
        u.u3 - l * k5 * wp / i2,
        u.u4 - l * k6 * wy / i3,
    ]
}

/// Heading and elevation from the current position toward a waypoint.
///
/// Returns `(heading, elevation)` in radians, both quadrant-correct.
pub fn desired_angles<T: Real>(
    current: &RigidBodyState<T>,
    wp: &Waypoint<T>,
) -> Result<(T, T), DynamicsError> {
    let dx = wp.target[0] - current.position[0];
    let dy = wp.target[1] - current.position[1];
    let dz = wp.target[2] - current.position[2];
    if dx == T::zero() && dy == T::zero() && dz == T::zero() {
        return Err(DynamicsError::CoincidentTarget);
    }
    let horizontal = (dx * dx + dy * dy).sqrt();
    Ok((dy.atan2(dx), dz.atan2(horizontal)))
}

/// Time derivative of the full state for thrusts held constant.
pub fn derivative<T: Real>(
    s: &RigidBodyState<T>,
    th: &MotorThrusts<T>,
    p: &AirframeParams<T>,
    variant: ModelVariant,
) -> [T; 12] {
    let u = control_inputs(th, p, variant);
    let a = translational_accel(s, u.u1, p, variant);
    let alpha = angular_accel(s, &u, p);
    [
        s.velocity[0],
        s.velocity[1],
        s.velocity[2],
        a[0],
        a[1],
        a[2],
        s.rates[0],
        s.rates[1],
        s.rates[2],
        alpha[0],
        alpha[1],
        alpha[2],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Forward Euler.
    Euler,
}

fn axpy<T: Real>(x: &[T; 12], h: T, d: &[T; 12]) -> [T; 12] {
    let mut out = *x;
    for (o, &di) in out.iter_mut().zip(d) {
        *o = *o + h * di;
    }
    out
}

/// Unchecked single step; also used with negative `dt` by the reversibility tests.
pub(crate) fn advance<T: Real>(
    s: &RigidBodyState<T>,
    th: &MotorThrusts<T>,
    p: &AirframeParams<T>,
    variant: ModelVariant,
    integrator: Integrator,
    dt: T,
) -> RigidBodyState<T> {
    let x = s.components();
    let f = |c: &[T; 12]| derivative(&RigidBodyState::from_components(*c), th, p, variant);
    let next = match integrator {
        Integrator::Euler => axpy(&x, dt, &f(&x)),
        Integrator::Rk4 => {
            let half = dt / T::lit(2.0);
            let k1 = f(&x);
            let k2 = f(&axpy(&x, half, &k1));
            let k3 = f(&axpy(&x, half, &k2));
            let k4 = f(&axpy(&x, dt, &k3));
            let sixth = dt / T::lit(6.0);
            let two = T::lit(2.0);
            let mut out = x;
            for i in 0..12 {
                out[i] = x[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
            }
            out
        }
    };
    RigidBodyState::from_components(next)
}

/// Advances the state by `dt` seconds with classical RK4, thrusts held
/// constant across the step.
pub fn step<T: Real>(
    s: &RigidBodyState<T>,
    th: &MotorThrusts<T>,
    p: &AirframeParams<T>,
    variant: ModelVariant,
    dt: T,
) -> Result<RigidBodyState<T>, DynamicsError> {
    step_with(s, th, p, variant, Integrator::Rk4, dt)
}

pub fn step_with<T: Real>(
    s: &RigidBodyState<T>,
    th: &MotorThrusts<T>,
    p: &AirframeParams<T>,
    variant: ModelVariant,
    integrator: Integrator,
    dt: T,
) -> Result<RigidBodyState<T>, DynamicsError> {
    if !(dt > T::zero() && dt <= T::lit(MAX_STEP_S)) {
        return Err(DynamicsError::InvalidStep(dt.to_f64().unwrap_or(f64::NAN)));
    }
    if !s.is_finite() {
        return Err(DynamicsError::NonFinite("state"));
    }
    th.check()?;
    let next = advance(s, th, p, variant, integrator, dt);
    if !next.is_finite() {
        return Err(DynamicsError::NonFinite("integrated state"));
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    type P = AirframeParams<f64>;

    fn hover_thrusts(p: &P) -> MotorThrusts<f64> {
        MotorThrusts::uniform(p.hover_thrust_per_motor())
    }

    #[test]
    fn identity_rotation_at_level() {
        let r = rotation_matrix(&Attitude::<f64>::level());
        for (i, row) in r.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn quarter_roll_rotation() {
        // Rx(π/2): body y maps to world z, body z to world -y.
        let r = rotation_matrix(&Attitude::new(FRAC_PI_2, 0.0, 0.0));
        let expected = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(r[i][j], expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn corrected_accel_is_thrust_along_body_z() {
        let p = P::default();
        let mut s = RigidBodyState::at_rest();
        s.attitude = Attitude::new(0.3, -0.7, 1.9);
        let u1 = 11.0;
        let a = translational_accel(&s, u1, &p, ModelVariant::Corrected);
        let r = rotation_matrix(&s.attitude);
        assert_abs_diff_eq!(a[0], u1 * r[0][2], epsilon = 1e-14);
        assert_abs_diff_eq!(a[1], u1 * r[1][2], epsilon = 1e-14);
        assert_abs_diff_eq!(a[2], u1 * r[2][2] - p.gravity, epsilon = 1e-14);
    }

    #[test]
    fn equal_thrusts_cancel_moments() {
        let p = P::default();
        let th = MotorThrusts::uniform(3.0);
        for v in [ModelVariant::AsPrinted, ModelVariant::Corrected] {
            let u = control_inputs(&th, &p, v);
            assert_eq!(u.u2, 0.0);
            assert_eq!(u.u3, 0.0);
        }
        assert_eq!(control_inputs(&th, &p, ModelVariant::Corrected).u4, 0.0);
    }

    #[test]
    fn hover_thrust_balances_gravity() {
        // 450 gf per motor lifting 1.8 kg.
        let p = P {
            mass: 1.8,
            ..P::default()
        };
        let th = MotorThrusts::uniform(0.450 * 9.81);
        let u = control_inputs(&th, &p, ModelVariant::Corrected);
        assert_abs_diff_eq!(u.u1, 9.81, epsilon = 1e-12);
    }

    #[test]
    fn corrected_yaw_row() {
        let p = P::default();
        let (t, d) = (3.0, 0.4);
        let th = MotorThrusts([t + d, t - d, t + d, t - d]);
        let u = control_inputs(&th, &p, ModelVariant::Corrected);
        assert_abs_diff_eq!(u.u2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.u3, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u.u4, 4.0 * p.moment_factor * d / p.inertia[2], epsilon = 1e-12);
    }

    #[test]
    fn as_printed_rows_verbatim() {
        let p = P::default();
        let th = MotorThrusts([1.0, 2.0, 3.0, 4.0]);
        let u = control_inputs(&th, &p, ModelVariant::AsPrinted);
        let l = p.arm_length;
        assert_abs_diff_eq!(u.u2, l * 4.0 / p.inertia[0], epsilon = 1e-12);
        assert_abs_diff_eq!(u.u3, l * 0.0 / p.inertia[1], epsilon = 1e-12);
        assert_abs_diff_eq!(u.u4, l * 10.0 / p.inertia[2], epsilon = 1e-12);
    }

    #[test]
    fn hover_and_free_fall_accelerations() {
        let p = P::default();
        let s = RigidBodyState::at_rest();
        for v in [ModelVariant::AsPrinted, ModelVariant::Corrected] {
            assert_eq!(translational_accel(&s, p.gravity, &p, v), [0.0, 0.0, 0.0]);
            assert_eq!(translational_accel(&s, 0.0, &p, v), [0.0, 0.0, -p.gravity]);
        }
    }

    #[test]
    fn as_printed_translational_point() {
        let p = P::default();
        let mut s = RigidBodyState::at_rest();
        s.attitude = Attitude::new(0.1, 0.2, 0.3);
        let a = translational_accel(&s, 12.0, &p, ModelVariant::AsPrinted);
        // Hand evaluation of the printed trig expressions.
        let (phi, th, psi): (f64, f64, f64) = (0.1, 0.2, 0.3);
        let ax = 12.0 * (phi.cos() * th.sin() * psi.cos() + phi.sin() * th.sin());
        let ay = 12.0 * (phi.sin() * th.sin() * psi.cos() + phi.cos() * th.sin());
        let az = 12.0 * (phi.cos() * psi.cos()) - 9.81;
        assert_abs_diff_eq!(a[0], ax, epsilon = 1e-12);
        assert_abs_diff_eq!(a[1], ay, epsilon = 1e-12);
        assert_abs_diff_eq!(a[2], az, epsilon = 1e-12);
    }

    #[test]
    fn angular_accel_drag_term() {
        let p = P {
            arm_length: 0.25,
            inertia: [0.01, 0.01, 0.02],
            angular_drag: [0.02, 0.0, 0.0],
            ..P::default()
        };
        let mut s = RigidBodyState::at_rest();
        s.rates = [1.0, 0.0, 0.0];
        let a = angular_accel(&s, &ControlInputs::default(), &p);
        assert_abs_diff_eq!(a[0], -0.5, epsilon = 1e-12);
        assert_eq!(a[1], 0.0);

        let p0 = P::default();
        let u = ControlInputs {
            u1: 9.0,
            u2: 1.5,
            u3: -2.0,
            u4: 0.25,
        };
        s.rates = [0.3, -0.2, 0.9];
        assert_eq!(angular_accel(&s, &u, &p0), [1.5, -2.0, 0.25]);
        assert_eq!(
            angular_accel(&RigidBodyState::at_rest(), &ControlInputs::default(), &p0),
            [0.0; 3]
        );
    }

    #[test]
    fn desired_angles_cases() {
        let s = RigidBodyState::<f64>::at_rest();
        let (h, e) = desired_angles(&s, &Waypoint { target: [1.0, 0.0, 0.0] }).unwrap();
        assert_eq!((h, e), (0.0, 0.0));
        let (_, e) = desired_angles(&s, &Waypoint { target: [0.0, 0.0, 3.0] }).unwrap();
        assert_abs_diff_eq!(e, FRAC_PI_2, epsilon = 1e-15);
        let (h, e) = desired_angles(&s, &Waypoint { target: [3.0, 4.0, 5.0] }).unwrap();
        assert_abs_diff_eq!(h, 0.927_295_218_001_612_2, epsilon = 1e-12);
        assert_abs_diff_eq!(e, FRAC_PI_4, epsilon = 1e-15);
        // Behind and to the right: the single-argument arctangent would be off by π.
        let (h, _) = desired_angles(&s, &Waypoint { target: [-1.0, -1.0, 0.0] }).unwrap();
        assert_abs_diff_eq!(h, -3.0 * FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(
            desired_angles(&s, &Waypoint { target: [0.0, 0.0, 0.0] }),
            Err(DynamicsError::CoincidentTarget)
        );
    }

    #[test]
    fn hover_is_a_fixed_point() {
        let p = P::default();
        let th = hover_thrusts(&p);
        let mut s = RigidBodyState::at_rest();
        s.position = [1.0, -2.0, 3.0];
        for _ in 0..5000 {
            s = step(&s, &th, &p, ModelVariant::Corrected, 0.002).unwrap();
        }
        assert_abs_diff_eq!(s.position[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.position[1], -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.position[2], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn free_fall_one_second() {
        let p = P::default();
        let mut s = RigidBodyState::at_rest();
        for _ in 0..500 {
            s = step(&s, &MotorThrusts::default(), &p, ModelVariant::Corrected, 0.002).unwrap();
        }
        assert_abs_diff_eq!(s.position[2], -p.gravity / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn reversing_the_step_recovers_free_fall_state() {
        let p = P::default();
        let th = MotorThrusts::default();
        let start = RigidBodyState {
            position: [0.5, 0.0, 10.0],
            velocity: [1.0, -0.5, 2.0],
            ..RigidBodyState::at_rest()
        };
        let mut s = start;
        for _ in 0..200 {
            s = advance(&s, &th, &p, ModelVariant::Corrected, Integrator::Rk4, 0.005);
        }
        for _ in 0..200 {
            s = advance(&s, &th, &p, ModelVariant::Corrected, Integrator::Rk4, -0.005);
        }
        for (a, b) in s.components().iter().zip(start.components()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn step_rejects_bad_input() {
        let p = P::default();
        let s = RigidBodyState::at_rest();
        let th = MotorThrusts::uniform(1.0);
        let v = ModelVariant::Corrected;
        assert!(matches!(step(&s, &th, &p, v, 0.0), Err(DynamicsError::InvalidStep(_))));
        assert!(matches!(step(&s, &th, &p, v, 0.051), Err(DynamicsError::InvalidStep(_))));
        let mut bad = s;
        bad.velocity[1] = f64::NAN;
        assert!(matches!(step(&bad, &th, &p, v, 0.01), Err(DynamicsError::NonFinite(_))));
        let th_bad = MotorThrusts([1.0, f64::INFINITY, 1.0, 1.0]);
        assert!(matches!(step(&s, &th_bad, &p, v, 0.01), Err(DynamicsError::NonFinite(_))));
        let th_neg = MotorThrusts([1.0, 1.0, -0.1, 1.0]);
        assert!(matches!(
            step(&s, &th_neg, &p, v, 0.01),
            Err(DynamicsError::NegativeThrust { index: 3, .. })
        ));
    }

    #[test]
    fn single_precision_instantiation() {
        let p = AirframeParams::<f32>::default();
        let th = MotorThrusts::uniform(p.hover_thrust_per_motor());
        let s = step(&RigidBodyState::at_rest(), &th, &p, ModelVariant::Corrected, 0.002f32).unwrap();
        assert!(s.position[2].abs() < 1e-5);
    }

    #[test]
    fn airframe_validation() {
        assert!(P::default().validate().is_ok());
        let bad = P {
            inertia: [0.01, 0.0, 0.02],
            ..P::default()
        };
        assert_eq!(bad.validate(), Err(DynamicsError::InvalidAirframe("inertia")));
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("corrected".parse::<ModelVariant>(), Ok(ModelVariant::Corrected));
        assert_eq!("as-printed".parse::<ModelVariant>(), Ok(ModelVariant::AsPrinted));
        assert!("other".parse::<ModelVariant>().is_err());
    }
}
