//! Flight controller settings and their `key = value` text form.
//!
//! Integer gains and percentages use the same 0–200 / 0–100 scales as the
//! KK2 menus. The conversion from those integers to physical gains goes
//! through the unit constants below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Roll/pitch rate loop: output fraction per rad/s of error at P = 100.
pub const RATE_P_UNIT: f64 = 0.02;
/// Roll/pitch rate loop: output fraction per rad of integrated error at I = 100.
pub const RATE_I_UNIT: f64 = 0.02;
/// Yaw rate loop units, as above.
pub const YAW_P_UNIT: f64 = 0.15;
pub const YAW_I_UNIT: f64 = 0.15;
/// Self-level loop: commanded rate (rad/s) per rad of attitude error at P = 100.
pub const LEVEL_P_UNIT: f64 = 8.0;
pub const LEVEL_I_UNIT: f64 = 4.0;
/// Height dampening: throttle fraction per m/s² at setting 100.
pub const HEIGHT_DAMP_UNIT: f64 = 0.05;
/// Full roll/pitch stick in rate mode, rad/s.
pub const MAX_RATE: f64 = 3.0;
/// Full yaw stick, rad/s.
pub const MAX_YAW_RATE: f64 = 2.0;
/// Full roll/pitch stick in self-level mode, rad.
pub const MAX_ANGLE: f64 = 0.6;
/// Gravity reference for the accelerometer, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("setting `{key}`: cannot parse `{value}`")]
    Parse { key: String, value: String },
    #[error("setting `{key}` = {value} outside {lo}..={hi}")]
    OutOfRange {
        key: &'static str,
        value: String,
        lo: f64,
        hi: f64,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
}

impl ConfigError {
    /// Name of the offending setting, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::Parse { key, .. } => Some(key),
            ConfigError::OutOfRange { key, .. } => Some(key),
            ConfigError::Syntax { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfLevelSource {
    #[default]
    Stick,
    Aux,
}

impl fmt::Display for SelfLevelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfLevelSource::Stick => "stick",
            SelfLevelSource::Aux => "aux",
        })
    }
}

impl FromStr for SelfLevelSource {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "stick" => Ok(Self::Stick),
            "aux" => Ok(Self::Aux),
            _ => Err(()),
        }
    }
}

trait Setting: Sized + fmt::Display {
    fn parse_setting(s: &str) -> Option<Self>;
    fn in_range(&self, lo: f64, hi: f64) -> bool;
}

macro_rules! int_setting {
    ($($t:ty),*) => {$(
        impl Setting for $t {
            fn parse_setting(s: &str) -> Option<Self> {
                s.parse().ok()
            }
            fn in_range(&self, lo: f64, hi: f64) -> bool {
                let v = f64::from(*self);
                v >= lo && v <= hi
            }
        }
    )*};
}
int_setting!(u16, u32);

impl Setting for f64 {
    fn parse_setting(s: &str) -> Option<Self> {
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
    fn in_range(&self, lo: f64, hi: f64) -> bool {
        *self >= lo && *self <= hi
    }
}

impl Setting for bool {
    fn parse_setting(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Some(true),
            "false" | "no" | "off" | "0" => Some(false),
            _ => None,
        }
    }
    fn in_range(&self, _: f64, _: f64) -> bool {
        true
    }
}

impl Setting for SelfLevelSource {
    fn parse_setting(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn in_range(&self, _: f64, _: f64) -> bool {
        true
    }
}

macro_rules! controller_config {
    ($($(#[$doc:meta])* $field:ident : $ty:ty = $default:expr, [$lo:expr, $hi:expr];)*) => {
        /// Every menu setting of the emulated flight controller.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct ControllerConfig {
            $($(#[$doc])* pub $field: $ty,)*
        }

        impl Default for ControllerConfig {
            fn default() -> Self {
                Self { $($field: $default,)* }
            }
        }

        impl ControllerConfig {
            /// Setting names, in file order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            /// Current value of a setting in its text form.
            pub fn get(&self, key: &str) -> Result<String, ConfigError> {
                match key {
                    $(stringify!($field) => Ok(self.$field.to_string()),)*
                    _ => Err(ConfigError::UnknownKey(key.to_string())),
                }
            }

            /// Parses and range-checks `value`, then stores it. On error the
            /// configuration is left untouched.
            pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                let value = value.trim();
                match key {
                    $(stringify!($field) => {
                        let v = <$ty as Setting>::parse_setting(value).ok_or_else(|| ConfigError::Parse {
                            key: key.to_string(),
                            value: value.to_string(),
                        })?;
                        if !v.in_range($lo as f64, $hi as f64) {
                            return Err(ConfigError::OutOfRange {
                                key: stringify!($field),
                                value: value.to_string(),
                                lo: $lo as f64,
                                hi: $hi as f64,
                            });
                        }
                        self.$field = v;
                        Ok(())
                    })*
                    _ => Err(ConfigError::UnknownKey(key.to_string())),
                }
            }

            pub fn validate(&self) -> Result<(), ConfigError> {
                $(
                    if !Setting::in_range(&self.$field, $lo as f64, $hi as f64) {
                        return Err(ConfigError::OutOfRange {
                            key: stringify!($field),
                            value: self.$field.to_string(),
                            lo: $lo as f64,
                            hi: $hi as f64,
                        });
                    }
                )*
                Ok(())
            }
        }
    };
}

controller_config! {
    roll_p: u16 = 50, [0, 200];
    roll_i: u16 = 25, [0, 200];
    /// Clamp on the integrated rate error, rad.
    roll_integral_limit: f64 = 5.0, [0.0, 1000.0];
    pitch_p: u16 = 50, [0, 200];
    pitch_i: u16 = 25, [0, 200];
    pitch_integral_limit: f64 = 5.0, [0.0, 1000.0];
    yaw_p: u16 = 50, [0, 200];
    yaw_i: u16 = 25, [0, 200];
    yaw_integral_limit: f64 = 2.0, [0.0, 1000.0];
    self_level_p: u16 = 50, [0, 200];
    self_level_i: u16 = 0, [0, 200];
    /// Clamp on the integrated attitude error, rad·s.
    self_level_integral_limit: f64 = 0.5, [0.0, 1000.0];
    self_level_source: SelfLevelSource = SelfLevelSource::Stick, [0, 0];
    auto_disarm: bool = true, [0, 0];
    cppm_enabled: bool = false, [0, 0];
    stick_scaling_roll: u16 = 100, [0, 200];
    stick_scaling_pitch: u16 = 100, [0, 200];
    stick_scaling_yaw: u16 = 100, [0, 200];
    stick_scaling_throttle: u16 = 100, [0, 200];
    /// Percent of full throttle the motors idle at while armed.
    min_throttle: u16 = 10, [0, 100];
    height_damp: u16 = 30, [0, 100];
    /// Percent of full throttle height dampening may add or remove.
    height_damp_limit: u16 = 10, [0, 100];
    /// Alarm set-point in tenths of a volt, 0 disables.
    alarm_tenths: u32 = 108, [0, 1000];
    /// Output low-pass time constant, ms; 0 disables.
    servo_filter_ms: u16 = 50, [0, 1000];
}

/// Axis selector for gain edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainAxis {
    Roll,
    Pitch,
    Yaw,
    SelfLevel,
}

impl GainAxis {
    /// Settings keys are `<prefix>_p` and `<prefix>_i`.
    pub fn key_prefix(self) -> &'static str {
        match self {
            GainAxis::Roll => "roll",
            GainAxis::Pitch => "pitch",
            GainAxis::Yaw => "yaw",
            GainAxis::SelfLevel => "self_level",
        }
    }
}

impl FromStr for GainAxis {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "roll" => Ok(Self::Roll),
            "pitch" => Ok(Self::Pitch),
            "yaw" => Ok(Self::Yaw),
            "self_level" => Ok(Self::SelfLevel),
            _ => Err(()),
        }
    }
}

impl ControllerConfig {
    /// Sets P and I for one axis (roll and pitch are independent here; the
    /// menu's linked edit is just two calls).
    pub fn set_gains(&mut self, axis: GainAxis, p: u16, i: u16) -> Result<(), ConfigError> {
        let prefix = axis.key_prefix();
        let mut next = self.clone();
        next.set(&format!("{prefix}_p"), &p.to_string())?;
        next.set(&format!("{prefix}_i"), &i.to_string())?;
        *self = next;
        Ok(())
    }

    /// Parses a `key = value` document. `#` starts a comment. Keys not
    /// mentioned keep their defaults.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: n + 1 })?;
            cfg.set(key.trim(), value)?;
        }
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            // KEYS and get() are generated from the same list.
            let value = self.get(key).expect("listed key");
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_menu_recommendations() {
        let c = ControllerConfig::default();
        assert_eq!(c.min_throttle, 10);
        assert_eq!(c.height_damp, 30);
        assert_eq!(c.height_damp_limit, 10);
        assert_eq!(c.alarm_tenths, 108);
        assert_eq!(c.servo_filter_ms, 50);
        assert_eq!(c.stick_scaling_roll, 100);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn kv_roundtrip() {
        let c = ControllerConfig {
            roll_p: 80,
            self_level_source: SelfLevelSource::Aux,
            auto_disarm: false,
            roll_integral_limit: 2.5,
            ..Default::default()
        };
        let text = c.to_kv_string();
        assert!(text.contains("roll_p = 80\n"));
        assert!(text.contains("self_level_source = aux\n"));
        assert_eq!(ControllerConfig::from_kv_str(&text).unwrap(), c);
        assert_eq!(text.lines().count(), ControllerConfig::KEYS.len());
    }

    #[test]
    fn set_validates() {
        let mut c = ControllerConfig::default();
        assert!(matches!(c.set("roll_p", "201"), Err(ConfigError::OutOfRange { key: "roll_p", .. })));
        assert!(matches!(c.set("roll_p", "abc"), Err(ConfigError::Parse { .. })));
        assert!(matches!(c.set("nope", "1"), Err(ConfigError::UnknownKey(_))));
        assert_eq!(c, ControllerConfig::default());
        c.set("auto_disarm", "NO").unwrap();
        assert!(!c.auto_disarm);
        assert_eq!(c.get("auto_disarm").unwrap(), "false");
        c.set_gains(GainAxis::Yaw, 70, 10).unwrap();
        assert_eq!((c.yaw_p, c.yaw_i), (70, 10));
        assert!(c.set_gains(GainAxis::Roll, 70, 300).is_err());
        assert_eq!(c.roll_p, 50);
    }

    #[test]
    fn kv_parse_errors_and_comments() {
        let c = ControllerConfig::from_kv_str("# gains\nroll_p = 60 # tuned\n\n").unwrap();
        assert_eq!(c.roll_p, 60);
        assert_eq!(
            ControllerConfig::from_kv_str("roll_p 60"),
            Err(ConfigError::Syntax { line: 1 })
        );
    }

    #[test]
    fn json_partial_config() {
        let c: ControllerConfig = serde_json::from_str(r#"{"roll_p": 70}"#).unwrap();
        assert_eq!(c.roll_p, 70);
        assert_eq!(c.pitch_p, 50);
        assert!(serde_json::from_str::<ControllerConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
