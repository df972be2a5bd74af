//! WebSocket front end for a [`Session`].
//!
//! One session is shared by every connection. A driver task advances the
//! simulation against the wall clock; all server messages go out through a
//! broadcast channel and each connection keeps the ones addressed to it.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use tokio::sync::broadcast;
use tokio::task::JoinHandle;

use crate::protocol::{ClientId, ErrorCode, ServerMessage};
use crate::session::{Outbound, Session};

const DRIVER_PERIOD: Duration = Duration::from_millis(10);
/// Ticks per driver pass when running as fast as possible.
const UNTHROTTLED_TICKS: u64 = 500;
const BROADCAST_CAPACITY: usize = 4096;

#[derive(Clone, Debug)]
struct Frame {
    to: Option<ClientId>,
    text: Arc<str>,
}

struct Shared {
    session: Mutex<Session>,
    tx: broadcast::Sender<Frame>,
    next_client: AtomicU64,
}

impl Shared {
    /// Must be called with the session lock held so frames keep their order.
    fn publish(&self, out: Vec<Outbound>) {
        for o in out {
            let (to, msg) = match o {
                Outbound::All(m) => (None, m),
                Outbound::To(c, m) => (Some(c), m),
            };
            match serde_json::to_string(&msg) {
                Ok(text) => {
                    // no subscribers is fine
                    let _ = self.tx.send(Frame { to, text: text.into() });
                }
                Err(e) => tracing::error!("serializing server message: {e}"),
            }
        }
    }
}

pub fn router(session: Session) -> (Router, JoinHandle<()>) {
    let (tx, _) = broadcast::channel(BROADCAST_CAPACITY);
    let shared = Arc::new(Shared { session: Mutex::new(session), tx, next_client: AtomicU64::new(1) });
    let driver = tokio::spawn(drive(shared.clone()));
    let app = Router::new().route("/ws", get(upgrade)).route("/health", get(health)).with_state(shared);
    (app, driver)
}

/// Bind and serve in the background. Returns the bound address, so
/// `127.0.0.1:0` works for tests.
pub async fn spawn(addr: SocketAddr, session: Session) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let (app, driver) = router(session);
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!("server stopped: {e}");
        }
        driver.abort();
    });
    Ok((local, handle))
}

pub async fn serve(addr: SocketAddr, session: Session) -> std::io::Result<()> {
    let (local, handle) = spawn(addr, session).await?;
    tracing::info!("listening on ws://{local}/ws");
    handle.await.map_err(std::io::Error::other)
}

async fn drive(shared: Arc<Shared>) {
    let (realtime, dt) = {
        let s = shared.session.lock().unwrap();
        (s.config().realtime, s.dt())
    };
    let mut owed = 0.0;
    let mut last = Instant::now();
    let mut interval = tokio::time::interval(DRIVER_PERIOD);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        let ticks = if realtime == 0.0 {
            tokio::task::yield_now().await;
            UNTHROTTLED_TICKS
        } else {
            interval.tick().await;
            let now = Instant::now();
            owed += realtime * now.duration_since(last).as_secs_f64() / dt;
            last = now;
            let n = owed.floor();
            owed -= n;
            n as u64
        };
        if ticks == 0 {
            continue;
        }
        let mut s = shared.session.lock().unwrap();
        let out = s.advance(ticks);
        shared.publish(out);
    }
}

async fn health(State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    let info = shared.session.lock().unwrap().info();
    Json(info)
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, shared))
}

async fn connection(socket: WebSocket, shared: Arc<Shared>) {
    let id = shared.next_client.fetch_add(1, Ordering::Relaxed);
    // subscribe before connecting so the hello is not missed
    let mut rx = shared.tx.subscribe();
    {
        let mut s = shared.session.lock().unwrap();
        let out = s.connect(id);
        shared.publish(out);
    }
    tracing::debug!(client = id, "connected");
    let (mut sink, mut stream) = socket.split();
    loop {
        tokio::select! {
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let mut s = shared.session.lock().unwrap();
                    let out = s.handle_text(id, text.as_str());
                    shared.publish(out);
                }
                Some(Ok(Message::Binary(_))) => {
                    let _guard = shared.session.lock().unwrap();
                    let msg = ServerMessage::Error { code: ErrorCode::BadMessage, message: "frames must be JSON text".into(), request: None };
                    shared.publish(vec![Outbound::To(id, msg)]);
                }
                Some(Ok(_)) => {}
                Some(Err(_)) | None => break,
            },
            frame = rx.recv() => match frame {
                Ok(f) if f.to.is_none() || f.to == Some(id) => {
                    if sink.send(Message::Text(f.text.as_ref().into())).await.is_err() {
                        break;
                    }
                }
                Ok(_) => {}
                Err(broadcast::error::RecvError::Lagged(n)) => tracing::warn!(client = id, "dropped {n} frames"),
                Err(broadcast::error::RecvError::Closed) => break,
            },
        }
    }
    let mut s = shared.session.lock().unwrap();
    let out = s.disconnect(id);
    shared.publish(out);
    tracing::debug!(client = id, "disconnected");
}
