//! Checks that a logged manoeuvre shows the expected motion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::telemetry::{FlightLog, TelemetryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Primitive {
    Takeoff,
    Land,
    Forward,
    Backward,
    Left,
    Right,
    YawCw,
    YawCcw,
    Hover,
}

impl Primitive {
    pub const ALL: [Primitive; 9] = [
        Primitive::Takeoff,
        Primitive::Land,
        Primitive::Forward,
        Primitive::Backward,
        Primitive::Left,
        Primitive::Right,
        Primitive::YawCw,
        Primitive::YawCcw,
        Primitive::Hover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Primitive::Takeoff => "TAKEOFF",
            Primitive::Land => "LAND",
            Primitive::Forward => "FORWARD",
            Primitive::Backward => "BACKWARD",
            Primitive::Left => "LEFT",
            Primitive::Right => "RIGHT",
            Primitive::YawCw => "YAW_CW",
            Primitive::YawCcw => "YAW_CCW",
            Primitive::Hover => "HOVER",
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Primitive {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let up = s.to_ascii_uppercase().replace('-', "_");
        Primitive::ALL
            .into_iter()
            .find(|p| p.name() == up)
            .ok_or_else(|| format!("unknown primitive `{s}`"))
    }
}

/// Pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveLimits {
    /// Minimum climb or descent, m.
    pub min_vertical_m: f64,
    /// Height counted as on the ground after landing, m.
    pub ground_m: f64,
    /// Minimum horizontal travel for translations, m.
    pub min_travel_m: f64,
    /// Minimum heading change for yaw, rad.
    pub min_heading_rad: f64,
    /// Hover: largest horizontal excursion from the window start, m.
    pub max_drift_m: f64,
    /// Hover: largest |roll| or |pitch|, rad.
    pub max_tilt_rad: f64,
}

impl Default for PrimitiveLimits {
    fn default() -> Self {
        Self {
            min_vertical_m: 0.5,
            ground_m: 0.05,
            min_travel_m: 0.2,
            min_heading_rad: 0.1,
            max_drift_m: 0.5,
            max_tilt_rad: 2f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitiveReport {
    pub primitive: Primitive,
    pub passed: bool,
    pub metrics: Vec<(&'static str, f64)>,
    /// Name of the first failing metric.
    pub violated: Option<&'static str>,
}

impl PrimitiveReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrimitiveError {
    #[error("no telemetry in the window {0} s ..= {1} s")]
    EmptyWindow(f64, f64),
}

struct Checker {
    metrics: Vec<(&'static str, f64)>,
    violated: Option<&'static str>,
}

impl Checker {
    fn new() -> Self {
        Self { metrics: Vec::new(), violated: None }
    }

    fn check(&mut self, name: &'static str, value: f64, ok: bool) {
        self.metrics.push((name, value));
        if !ok && self.violated.is_none() {
            self.violated = Some(name);
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Horizontal displacement over the window in the heading frame at its
/// start: (forward, left).
fn body_displacement(w: &[TelemetryRecord]) -> (f64, f64) {
    let (a, b) = (&w[0], &w[w.len() - 1]);
    let (s, c) = a.attitude[2].sin_cos();
    let dx = b.position[0] - a.position[0];
    let dy = b.position[1] - a.position[1];
    (dx * c + dy * s, -dx * s + dy * c)
}

/// Evaluates `primitive` over the records with `t0 ≤ t ≤ t1`.
pub fn motion_primitive_check(
    log: &FlightLog,
    primitive: Primitive,
    t0: f64,
    t1: f64,
    limits: &PrimitiveLimits,
) -> Result<PrimitiveReport, PrimitiveError> {
    let w = log.window(t0, t1);
    if w.is_empty() {
        return Err(PrimitiveError::EmptyWindow(t0, t1));
    }
    let (first, last) = (&w[0], &w[w.len() - 1]);
    let mut c = Checker::new();
    match primitive {
        Primitive::Takeoff => {
            let rise = last.position[2] - first.position[2];
            c.check("climb_m", rise, rise >= limits.min_vertical_m);
        }
        Primitive::Land => {
            let drop = first.position[2] - last.position[2];
            c.check("descent_m", drop, drop >= limits.min_vertical_m);
            c.check("final_z_m", last.position[2], last.position[2] <= limits.ground_m);
        }
        Primitive::Forward | Primitive::Backward => {
            let sign = if primitive == Primitive::Forward { 1.0 } else { -1.0 };
            let pitch = mean(w.iter().map(|r| r.attitude[1]));
            let (fwd, _) = body_displacement(w);
            c.check("mean_pitch_rad", pitch, sign * pitch > 0.0);
            c.check("forward_m", fwd, sign * fwd >= limits.min_travel_m);
        }
        Primitive::Left | Primitive::Right => {
            // Roll + lowers the right side.
            let sign = if primitive == Primitive::Right { 1.0 } else { -1.0 };
            let roll = mean(w.iter().map(|r| r.attitude[0]));
            let (_, left) = body_displacement(w);
            c.check("mean_roll_rad", roll, sign * roll > 0.0);
            c.check("left_m", left, -sign * left >= limits.min_travel_m);
        }
        Primitive::YawCw | Primitive::YawCcw => {
            // Counter-clockwise is positive yaw and needs the CW props (1, 3)
            // to run faster while the turn spins up.
            let sign = if primitive == Primitive::YawCcw { 1.0 } else { -1.0 };
            let dpsi = last.attitude[2] - first.attitude[2];
            let peak = w.iter().map(|r| r.rates[2].abs()).fold(0.0, f64::max);
            let spin_up = w.iter().position(|r| r.rates[2].abs() >= 0.5 * peak).unwrap_or(0);
            let diff = mean(
                w[..=spin_up]
                    .iter()
                    .map(|r| r.thrust[0] + r.thrust[2] - r.thrust[1] - r.thrust[3]),
            );
            c.check("heading_change_rad", dpsi, sign * dpsi >= limits.min_heading_rad);
            c.check("cw_minus_ccw_n", diff, sign * diff > 0.0);
        }
        Primitive::Hover => {
            let drift = w.iter().map(|r| r.horizontal_distance(first)).fold(0.0, f64::max);
            let tilt = w
                .iter()
                .map(|r| r.attitude[0].abs().max(r.attitude[1].abs()))
                .fold(0.0, f64::max);
            c.check("max_drift_m", drift, drift < limits.max_drift_m);
            c.check("max_tilt_rad", tilt, tilt < limits.max_tilt_rad);
        }
    }
    Ok(PrimitiveReport {
        primitive,
        passed: c.violated.is_none(),
        metrics: c.metrics,
        violated: c.violated,
    })
}
