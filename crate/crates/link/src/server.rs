//! WebSocket front end. One task owns the [`LiveSession`] and steps it in
//! wall-clock time; connection tasks only move text frames in and out.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::time::{Instant, MissedTickBehavior};
use tokio_tungstenite::tungstenite::Message;

use quadsim::sim::Scenario;

use crate::protocol::{parse_client, ClientMessage, ServerMessage};
use crate::session::{Authority, LiveSession, SessionError};

/// Wall-clock period of the simulation task.
const TICK: Duration = Duration::from_millis(5);
/// Frames queued per client before telemetry for it is dropped.
const CLIENT_QUEUE: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("cannot listen: {0}")]
    Io(#[from] std::io::Error),
}

enum Inbound {
    Connected { id: u64, tx: mpsc::Sender<String> },
    Text { id: u64, text: String },
    Gone { id: u64 },
}

pub struct Server {
    listener: TcpListener,
    session: LiveSession,
}

impl Server {
    /// Validates the scenario and rate, then binds `addr`.
    pub async fn bind(scenario: &Scenario, addr: SocketAddr, rate_hz: f64) -> Result<Self, LinkError> {
        let session = LiveSession::new(scenario, rate_hz)?;
        let listener = TcpListener::bind(addr).await?;
        Ok(Self { listener, session })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub async fn run(self) -> Result<(), LinkError> {
        self.run_until(std::future::pending()).await
    }

    /// Serves until `shutdown` completes.
    pub async fn run_until(self, shutdown: impl Future<Output = ()>) -> Result<(), LinkError> {
        let Server { listener, mut session } = self;
        let (in_tx, mut in_rx) = mpsc::channel::<Inbound>(1024);
        let acceptor = tokio::spawn(accept_loop(listener, in_tx));

        let mut clients: HashMap<u64, mpsc::Sender<String>> = HashMap::new();
        let mut authority = Authority::default();
        let start = Instant::now();
        let mut ticker = tokio::time::interval(TICK);
        ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
        tokio::pin!(shutdown);

        loop {
            tokio::select! {
                _ = &mut shutdown => break,
                _ = ticker.tick() => {
                    let now = start.elapsed().as_secs_f64();
                    for msg in session.advance(now, now) {
                        let text = msg.to_json();
                        // A full queue means a stalled client; it misses this frame.
                        for tx in clients.values() {
                            let _ = tx.try_send(text.clone());
                        }
                    }
                }
                Some(event) = in_rx.recv() => {
                    let now = start.elapsed().as_secs_f64();
                    match event {
                        Inbound::Connected { id, tx } => {
                            let granted = authority.connect(id);
                            let _ = tx.try_send(ServerMessage::Authority { granted }.to_json());
                            clients.insert(id, tx);
                        }
                        Inbound::Text { id, text } => {
                            let replies = handle_text(&mut session, &authority, id, &text, now);
                            if let Some(tx) = clients.get(&id) {
                                for r in replies {
                                    let _ = tx.try_send(r.to_json());
                                }
                            }
                        }
                        Inbound::Gone { id } => {
                            clients.remove(&id);
                            let (was_holder, promoted) = authority.disconnect(id);
                            if was_holder {
                                session.release();
                            }
                            if let Some(tx) = promoted.and_then(|p| clients.get(&p)) {
                                let _ = tx.try_send(ServerMessage::Authority { granted: true }.to_json());
                            }
                        }
                    }
                }
            }
        }
        acceptor.abort();
        Ok(())
    }
}

fn handle_text(session: &mut LiveSession, authority: &Authority, id: u64, text: &str, now: f64) -> Vec<ServerMessage> {
    let msg = match parse_client(text) {
        Ok(m) => m,
        Err(e) => return vec![e.to_message()],
    };
    if authority.is_holder(id) {
        return session.command(&msg, now);
    }
    match msg {
        ClientMessage::ConfigGet { key } => vec![session.read(&key)],
        _ => vec![ServerMessage::Notice {
            message: "read-only: another client holds command authority".into(),
        }],
    }
}

async fn accept_loop(listener: TcpListener, inbound: mpsc::Sender<Inbound>) {
    let mut next_id = 0u64;
    loop {
        let Ok((stream, _)) = listener.accept().await else { continue };
        next_id += 1;
        tokio::spawn(connection(stream, next_id, inbound.clone()));
    }
}

async fn connection(stream: TcpStream, id: u64, inbound: mpsc::Sender<Inbound>) {
    let Ok(ws) = tokio_tungstenite::accept_async(stream).await else { return };
    let (mut sink, mut source) = ws.split();
    let (tx, mut rx) = mpsc::channel::<String>(CLIENT_QUEUE);
    if inbound.send(Inbound::Connected { id, tx }).await.is_err() {
        return;
    }
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    while let Some(Ok(frame)) = source.next().await {
        match frame {
            Message::Text(text) => {
                let text = text.as_str().to_owned();
                if inbound.send(Inbound::Text { id, text }).await.is_err() {
                    break;
                }
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    let _ = inbound.send(Inbound::Gone { id }).await;
    let _ = writer.await;
}

/// Serves `scenario` on all interfaces at `port` until the process ends.
pub async fn serve(scenario: &Scenario, port: u16, rate_hz: f64) -> Result<(), LinkError> {
    let server = Server::bind(scenario, SocketAddr::from(([0, 0, 0, 0], port)), rate_hz).await?;
    server.run().await
}
