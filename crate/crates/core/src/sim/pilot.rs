//! Scripted pilot: flies the craft by watching its true position, the way a
//! person on the ground would, and produces stick commands.

use serde::{Deserialize, Serialize};

use crate::dynamics::RigidBodyState;
use crate::radio::ChannelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotAction {
    /// Throttle closed, sticks centred.
    #[default]
    Idle,
    /// Arm gesture; holds right aileron too when self-level is wanted.
    Arm,
    /// Disarm gesture.
    Disarm,
    /// Fly toward `altitude_m`, holding position unless sticks are given.
    Fly,
    /// Descend to the ground and close the throttle on contact.
    Land,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotSegment {
    pub action: PilotAction,
    pub duration_s: f64,
    /// Altitude target reached (linearly) at the end of a `fly` segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude_m: Option<f64>,
    /// Stick overrides, channel units. A non-zero roll or pitch suspends
    /// position hold for the segment.
    #[serde(default)]
    pub roll: f64,
    #[serde(default)]
    pub pitch: f64,
    #[serde(default)]
    pub yaw: f64,
}

impl PilotSegment {
    pub fn new(action: PilotAction, duration_s: f64) -> Self {
        Self { action, duration_s, ..Self::default() }
    }

    pub fn fly_to(altitude_m: f64, duration_s: f64) -> Self {
        Self { altitude_m: Some(altitude_m), ..Self::new(PilotAction::Fly, duration_s) }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotScript {
    /// Arm with self-level engaged.
    #[serde(default = "yes")]
    pub self_level: bool,
    #[serde(default = "yes")]
    pub hold_position: bool,
    pub segments: Vec<PilotSegment>,
}

impl PilotScript {
    /// Arm, climb to `altitude` m, hold for `hold_s`, land and disarm.
    pub fn hover(altitude: f64, hold_s: f64) -> Self {
        Self {
            self_level: true,
            hold_position: true,
            segments: vec![
                PilotSegment::new(PilotAction::Arm, 1.5),
                PilotSegment::fly_to(altitude, 4.0),
                PilotSegment::fly_to(altitude, hold_s),
                PilotSegment::new(PilotAction::Land, 5.0),
                PilotSegment::new(PilotAction::Disarm, 1.5),
            ],
        }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Start time of segment `index`.
    pub fn segment_start(&self, index: usize) -> f64 {
        self.segments[..index].iter().map(|s| s.duration_s).sum()
    }

    pub fn validate(&self) -> Result<(), String> {
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration_s.is_finite() && s.duration_s > 0.0) {
                return Err(format!("input.segments[{i}].duration_s must be positive"));
            }
            if let Some(a) = s.altitude_m {
                if !a.is_finite() || a < 0.0 {
                    return Err(format!("input.segments[{i}].altitude_m must be non-negative"));
                }
            }
            for (name, v) in [("roll", s.roll), ("pitch", s.pitch), ("yaw", s.yaw)] {
                if !(v.is_finite() && v.abs() <= 100.0) {
                    return Err(format!("input.segments[{i}].{name} must be within ±100"));
                }
            }
        }
        Ok(())
    }
}

// Altitude loop, channel units per m, per m/s, per m·s.
const ALT_KP: f64 = 12.0;
const ALT_KD: f64 = 11.0;
const ALT_KI: f64 = 4.0;
const ALT_I_LIMIT: f64 = 25.0;
const HOVER_GUESS: f64 = 62.0;
const FLY_THROTTLE: (f64, f64) = (8.0, 95.0);
// Position loop: rad of tilt per m, per m/s.
const POS_KP: f64 = 0.12;
const POS_KD: f64 = 0.2;
const POS_TILT_LIMIT: f64 = 0.25;
// Stick units per rad of tilt error.
const LEVEL_MODE_ATT_GAIN: f64 = 250.0;
const RATE_MODE_ATT_GAIN: f64 = 100.0;
const LAND_SPEED: f64 = 0.5;
const CONTACT_Z: f64 = 0.02;

/// Running pilot.
#[derive(Debug, Clone)]
pub struct Pilot {
    script: PilotScript,
    segment: usize,
    segment_t0: f64,
    alt_from: f64,
    alt_target: f64,
    alt_integral: f64,
    anchor: [f64; 2],
    touched_down: bool,
}

impl Pilot {
    pub fn new(script: PilotScript) -> Self {
        Self {
            script,
            segment: 0,
            segment_t0: 0.0,
            alt_from: 0.0,
            alt_target: 0.0,
            alt_integral: 0.0,
            anchor: [0.0; 2],
            touched_down: false,
        }
    }

    pub fn script(&self) -> &PilotScript {
        &self.script
    }

    /// Current altitude target, m.
    pub fn altitude_target(&self) -> f64 {
        self.alt_target
    }

    fn enter_segment(&mut self, index: usize, t: f64, s: &RigidBodyState<f64>) {
        self.segment = index;
        self.segment_t0 = t;
        self.alt_from = self.alt_target;
        self.anchor = [s.position[0], s.position[1]];
        self.touched_down = false;
    }

    /// Stick command for time `t` given the observed state.
    pub fn command(&mut self, t: f64, s: &RigidBodyState<f64>, dt: f64) -> ChannelSet {
        while self.segment < self.script.segments.len()
            && t >= self.segment_t0 + self.script.segments[self.segment].duration_s - 1e-9
        {
            let next_t0 = self.segment_t0 + self.script.segments[self.segment].duration_s;
            self.enter_segment(self.segment + 1, next_t0, s);
        }
        let Some(seg) = self.script.segments.get(self.segment).copied() else {
            return ChannelSet::sticks(0.0, 0.0, 0.0, 0.0);
        };
        let level_roll = if self.script.self_level { 100.0 } else { 0.0 };
        match seg.action {
            PilotAction::Idle => {
                self.alt_integral = 0.0;
                ChannelSet::sticks(0.0, 0.0, 0.0, 0.0)
            }
            PilotAction::Arm => {
                self.alt_integral = 0.0;
                ChannelSet::sticks(0.0, level_roll, 0.0, 100.0)
            }
            PilotAction::Disarm => {
                self.alt_integral = 0.0;
                ChannelSet::sticks(0.0, 0.0, 0.0, -100.0)
            }
            PilotAction::Fly => {
                let frac = ((t - self.segment_t0) / seg.duration_s).clamp(0.0, 1.0);
                let to = seg.altitude_m.unwrap_or(self.alt_from);
                self.alt_target = self.alt_from + (to - self.alt_from) * frac;
                let vz_ref = (to - self.alt_from) / seg.duration_s;
                self.fly(&seg, s, vz_ref, dt)
            }
            PilotAction::Land => {
                if self.touched_down || (s.position[2] <= CONTACT_Z && self.alt_target <= 0.0) {
                    self.touched_down = true;
                    self.alt_integral = 0.0;
                    return ChannelSet::sticks(0.0, 0.0, 0.0, 0.0);
                }
                self.alt_target = (self.alt_target - LAND_SPEED * dt).max(-0.5);
                self.fly(&seg, s, -LAND_SPEED, dt)
            }
        }
    }

    fn fly(&mut self, seg: &PilotSegment, s: &RigidBodyState<f64>, vz_ref: f64, dt: f64) -> ChannelSet {
        let ez = self.alt_target - s.position[2];
        if s.position[2] > CONTACT_Z {
            self.alt_integral = (self.alt_integral + ALT_KI * ez * dt).clamp(-ALT_I_LIMIT, ALT_I_LIMIT);
        }
        let throttle = (HOVER_GUESS + ALT_KP * ez + ALT_KD * (vz_ref - s.velocity[2]) + self.alt_integral)
            .clamp(FLY_THROTTLE.0, FLY_THROTTLE.1);

        let manual = seg.roll != 0.0 || seg.pitch != 0.0;
        let (mut roll, mut pitch) = (seg.roll, seg.pitch);
        if !manual && self.script.hold_position && s.position[2] > CONTACT_Z {
            let (target_pitch, target_roll) = self.position_tilt(s);
            // The pilot watches the craft's actual tilt rather than
            // trusting the stick-to-angle map.
            let gain = if self.script.self_level { LEVEL_MODE_ATT_GAIN } else { RATE_MODE_ATT_GAIN };
            pitch = gain * (target_pitch - s.attitude.pitch);
            roll = gain * (target_roll - s.attitude.roll);
        }
        ChannelSet::sticks(
            throttle,
            roll.clamp(-100.0, 100.0),
            pitch.clamp(-100.0, 100.0),
            seg.yaw,
        )
    }

    /// Forward and rightward tilt (rad) that brings the craft back over the anchor.
    fn position_tilt(&self, s: &RigidBodyState<f64>) -> (f64, f64) {
        let (sy, cy) = s.attitude.yaw.sin_cos();
        let ex = self.anchor[0] - s.position[0];
        let ey = self.anchor[1] - s.position[1];
        let (vx, vy) = (s.velocity[0], s.velocity[1]);
        let fwd_err = ex * cy + ey * sy;
        let left_err = -ex * sy + ey * cy;
        let v_fwd = vx * cy + vy * sy;
        let v_left = -vx * sy + vy * cy;
        let fwd = (POS_KP * fwd_err - POS_KD * v_fwd).clamp(-POS_TILT_LIMIT, POS_TILT_LIMIT);
        let left = (POS_KP * left_err - POS_KD * v_left).clamp(-POS_TILT_LIMIT, POS_TILT_LIMIT);
        // Roll + lowers the right side and pushes toward −y.
        (fwd, -left)
    }
}
