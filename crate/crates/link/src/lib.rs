//! Live link: runs the simulator in real time and talks JSON over WebSocket.
//!
//! The first connected client commands the craft; everyone receives
//! telemetry and events. If the commanding client goes quiet for
//! [`FAILSAFE_S`] the sticks drop to neutral with idle throttle.

pub mod protocol;
pub mod server;
pub mod session;

pub use protocol::{parse_client, ClientMessage, ProtocolError, ServerMessage};
pub use server::{serve, LinkError, Server};
pub use session::{Authority, LiveSession, SessionError, FAILSAFE_S, GESTURE_S};
