//! JSON messages of the live link. Every message is an object with a `type`
//! field.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use quadsim::controller::GainAxis;
use quadsim::radio::{ChannelSet, RadioError};
use quadsim::sim::{SimEvent, TelemetryRecord};

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// Sent on connect, and again to a client promoted to command authority.
    Authority { granted: bool },
    Telemetry(TelemetryRecord),
    Event(SimEvent),
    /// Current value of one controller setting.
    Config { key: String, value: String },
    /// Informational reply, e.g. to a read-only client's command.
    Notice { message: String },
    Error {
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        field: Option<String>,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }

    pub fn error(message: impl Into<String>, field: Option<&str>) -> Self {
        ServerMessage::Error {
            message: message.into(),
            field: field.map(str::to_owned),
        }
    }
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Sticks { throttle: f64, roll: f64, pitch: f64, yaw: f64, aux: bool },
    SetGains { axis: GainAxis, p: u16, i: u16 },
    /// `value` is sent as a JSON string, number or boolean.
    ConfigSet { key: String, value: String },
    ConfigGet { key: String },
    /// Shortcut for the arm stick gesture.
    Arm,
    /// Shortcut for the disarm stick gesture.
    Disarm,
}

impl ClientMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("client messages always serialize")
    }

    pub fn channels(&self) -> Option<ChannelSet> {
        match *self {
            ClientMessage::Sticks { throttle, roll, pitch, yaw, aux } => Some(ChannelSet {
                aux1: aux,
                ..ChannelSet::sticks(throttle, roll, pitch, yaw)
            }),
            _ => None,
        }
    }
}

/// A rejected client message. `field` names the offending member when there is one.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct ProtocolError {
    pub message: String,
    pub field: Option<String>,
}

impl ProtocolError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self { message: message.into(), field: Some(field.to_owned()) }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::error(self.message.clone(), self.field.as_deref())
    }
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64, ProtocolError> {
    match obj.get(key) {
        None => Err(ProtocolError::new(key, format!("missing field `{key}`"))),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ProtocolError::new(key, format!("field `{key}` must be a finite number"))),
    }
}

fn text<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a str, ProtocolError> {
    match obj.get(key) {
        None => Err(ProtocolError::new(key, format!("missing field `{key}`"))),
        Some(v) => v
            .as_str()
            .ok_or_else(|| ProtocolError::new(key, format!("field `{key}` must be a string"))),
    }
}

fn gain(obj: &Map<String, Value>, key: &str) -> Result<u16, ProtocolError> {
    match obj.get(key) {
        None => Err(ProtocolError::new(key, format!("missing field `{key}`"))),
        Some(v) => v
            .as_u64()
            .and_then(|n| u16::try_from(n).ok())
            .ok_or_else(|| ProtocolError::new(key, format!("field `{key}` must be an integer in 0..=65535"))),
    }
}

fn aux(obj: &Map<String, Value>) -> Result<bool, ProtocolError> {
    match obj.get("aux") {
        None | Some(Value::Null) => Ok(false),
        Some(Value::Bool(b)) => Ok(*b),
        Some(Value::Number(n)) if n.as_f64().is_some_and(f64::is_finite) => Ok(n.as_f64().unwrap_or(0.0) > 0.0),
        Some(_) => Err(ProtocolError::new("aux", "field `aux` must be a boolean or a number")),
    }
}

fn scalar(obj: &Map<String, Value>, key: &str) -> Result<String, ProtocolError> {
    match obj.get(key) {
        None => Err(ProtocolError::new(key, format!("missing field `{key}`"))),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(Value::Bool(b)) => Ok(b.to_string()),
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(_) => Err(ProtocolError::new(key, format!("field `{key}` must be a string, number or boolean"))),
    }
}

/// Parses and validates one client message.
pub fn parse_client(raw: &str) -> Result<ClientMessage, ProtocolError> {
    let value: Value = serde_json::from_str(raw).map_err(|e| ProtocolError {
        message: format!("malformed JSON: {e}"),
        field: None,
    })?;
    let Value::Object(obj) = value else {
        return Err(ProtocolError { message: "message must be a JSON object".into(), field: None });
    };
    let kind = text(&obj, "type")?;
    let msg = match kind {
        "sticks" => ClientMessage::Sticks {
            throttle: number(&obj, "throttle")?,
            roll: number(&obj, "roll")?,
            pitch: number(&obj, "pitch")?,
            yaw: number(&obj, "yaw")?,
            aux: aux(&obj)?,
        },
        "set_gains" => {
            let axis = text(&obj, "axis")?;
            ClientMessage::SetGains {
                axis: axis
                    .parse()
                    .map_err(|_| ProtocolError::new("axis", format!("unknown gain axis `{axis}`")))?,
                p: gain(&obj, "p")?,
                i: gain(&obj, "i")?,
            }
        }
        "config_set" => ClientMessage::ConfigSet {
            key: text(&obj, "key")?.to_owned(),
            value: scalar(&obj, "value")?,
        },
        "config_get" => ClientMessage::ConfigGet { key: text(&obj, "key")?.to_owned() },
        "arm" => ClientMessage::Arm,
        "disarm" => ClientMessage::Disarm,
        other => return Err(ProtocolError::new("type", format!("unknown message type `{other}`"))),
    };
    if let Some(ch) = msg.channels() {
        ch.validate().map_err(|e| match e {
            RadioError::OutOfRange { channel, value } => {
                ProtocolError::new(channel, format!("field `{channel}` out of range: {value}"))
            }
            other => ProtocolError { message: other.to_string(), field: None },
        })?;
    }
    Ok(msg)
}
