//! The live loop and its WebSocket front end.
//!
//! The simulation is owned by a single task. Connections talk to it through
//! a bounded inbound queue; replies and snapshots go out through one bounded
//! queue per client. The loop only ever uses `try_send` towards clients, so
//! a slow or vanished client loses messages but never holds up a tick.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use tokio::net::TcpListener;
use tokio::sync::mpsc::{self, error::TrySendError};
use tokio::task::JoinHandle;
use tokio::time::{interval, Interval, MissedTickBehavior};

use crate::protocol::{parse_request, Channel, Command, Request, ServerMessage, DEFAULT_CHANNELS};
use crate::record::LogSink;
use crate::session::Session;

/// Outgoing messages buffered per client before new ones are dropped.
pub const CLIENT_QUEUE: usize = 256;
const INBOUND_QUEUE: usize = 1024;

#[derive(Debug)]
pub enum Inbound {
    Connect { client: u64, tx: mpsc::Sender<ServerMessage> },
    Message { client: u64, text: String },
    Disconnect { client: u64 },
    Shutdown,
}

/// Cheap handle for talking to a running loop.
#[derive(Debug, Clone)]
pub struct LoopHandle {
    tx: mpsc::Sender<Inbound>,
    next_client: Arc<AtomicU64>,
}

impl LoopHandle {
    pub fn new() -> (Self, mpsc::Receiver<Inbound>) {
        let (tx, rx) = mpsc::channel(INBOUND_QUEUE);
        (Self { tx, next_client: Arc::new(AtomicU64::new(0)) }, rx)
    }

    /// Registers a client; `None` once the loop has stopped.
    pub async fn connect(&self) -> Option<(u64, mpsc::Receiver<ServerMessage>)> {
        let client = self.next_client.fetch_add(1, Ordering::Relaxed);
        let (tx, rx) = mpsc::channel(CLIENT_QUEUE);
        self.tx.send(Inbound::Connect { client, tx }).await.ok()?;
        Some((client, rx))
    }

    pub async fn send(&self, client: u64, text: String) -> bool {
        self.tx.send(Inbound::Message { client, text }).await.is_ok()
    }

    pub async fn request(&self, client: u64, seq: u64, command: Command) -> bool {
        let text = serde_json::to_string(&Request { seq, command }).expect("requests serialize");
        self.send(client, text).await
    }

    pub async fn disconnect(&self, client: u64) {
        let _ = self.tx.send(Inbound::Disconnect { client }).await;
    }

    pub async fn shutdown(&self) {
        let _ = self.tx.send(Inbound::Shutdown).await;
    }
}

struct Client {
    tx: mpsc::Sender<ServerMessage>,
    channels: Vec<Channel>,
}

struct Clients(HashMap<u64, Client>);

impl Clients {
    /// Queues `msg` for `client`, dropping it if the queue is full and the
    /// client if it has gone away.
    fn send(&mut self, client: u64, msg: ServerMessage) {
        let Some(c) = self.0.get(&client) else { return };
        match c.tx.try_send(msg) {
            Ok(()) => {}
            Err(TrySendError::Full(_)) => tracing::debug!(client, "client queue full; message dropped"),
            Err(TrySendError::Closed(_)) => {
                self.0.remove(&client);
            }
        }
    }

    fn broadcast_snapshots(&mut self, session: &Session) {
        let ids: Vec<u64> = self.0.keys().copied().collect();
        for id in ids {
            let channels = self.0[&id].channels.clone();
            self.send(id, ServerMessage::Snapshot(session.snapshot(&channels, None)));
        }
    }
}

fn ticker(ticks_per_second: f64) -> Interval {
    let mut t = interval(Duration::from_secs_f64(1.0 / ticks_per_second));
    t.set_missed_tick_behavior(MissedTickBehavior::Delay);
    t
}

/// Runs `session` until a shutdown message arrives or every handle is
/// dropped, then returns it. Ticks advance at the session's speed while it
/// is running; commands are applied as soon as they arrive, which is always
/// between two ticks.
pub async fn run_loop(mut session: Session, mut inbound: mpsc::Receiver<Inbound>, mut sink: Option<LogSink>) -> Session {
    let mut clients = Clients(HashMap::new());
    let mut speed = session.ticks_per_second();
    let mut clock = ticker(speed);
    // Which client sent each queued command, in queue order.
    let mut senders: VecDeque<u64> = VecDeque::new();

    loop {
        tokio::select! {
            biased;
            msg = inbound.recv() => {
                let (client, text) = match msg {
                    None | Some(Inbound::Shutdown) => break,
                    Some(Inbound::Connect { client, tx }) => {
                        clients.0.insert(client, Client { tx, channels: DEFAULT_CHANNELS.to_vec() });
                        clients.send(client, session.hello());
                        clients.send(client, ServerMessage::Snapshot(session.snapshot(&DEFAULT_CHANNELS, None)));
                        continue;
                    }
                    Some(Inbound::Disconnect { client }) => {
                        clients.0.remove(&client);
                        continue;
                    }
                    Some(Inbound::Message { client, text }) => (client, text),
                };
                match parse_request(&text) {
                    Err(err) => clients.send(client, err),
                    Ok(Request { seq, command: Command::Subscribe { mut channels } }) => {
                        channels.sort();
                        channels.dedup();
                        if let Some(c) = clients.0.get_mut(&client) {
                            c.channels = channels;
                        }
                        clients.send(client, ServerMessage::Ack { seq, tick: session.tick() });
                    }
                    Ok(Request { seq, command: Command::Snapshot { hierarchy } }) => {
                        let channels = clients.0.get(&client).map(|c| c.channels.clone()).unwrap_or_default();
                        clients.send(client, ServerMessage::Ack { seq, tick: session.tick() });
                        clients.send(client, ServerMessage::Snapshot(session.snapshot(&channels, hierarchy)));
                    }
                    Ok(Request { seq, command }) => match session.enqueue(seq, command) {
                        Err(err) => clients.send(client, err),
                        Ok(()) => senders.push_back(client),
                    },
                }
                if session.has_pending() {
                    let replies = session.drain();
                    for reply in replies {
                        let to = senders.pop_front().expect("one sender per queued command");
                        clients.send(to, reply);
                    }
                    if let Some(s) = sink.as_mut() {
                        if let Err(e) = s.sync(session.log()) {
                            tracing::error!("command log write failed: {e}");
                        }
                    }
                    if session.ticks_per_second() != speed {
                        speed = session.ticks_per_second();
                        clock = ticker(speed);
                    }
                    clients.broadcast_snapshots(&session);
                }
            }
            _ = clock.tick(), if session.tick_due() => {
                session.advance();
                clients.broadcast_snapshots(&session);
            }
        }
    }

    if let Some(s) = sink {
        if let Err(e) = s.close(session.log(), session.tick()) {
            tracing::error!("command log write failed: {e}");
        }
    }
    session
}

async fn ws_handler(ws: WebSocketUpgrade, State(handle): State<LoopHandle>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, handle))
}

async fn connection(socket: WebSocket, handle: LoopHandle) {
    let Some((client, mut outbox)) = handle.connect().await else { return };
    let (mut sink, mut stream) = socket.split();
    let writer = tokio::spawn(async move {
        while let Some(msg) = outbox.recv().await {
            let text = serde_json::to_string(&msg).expect("server messages serialize");
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });
    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(b) => String::from_utf8_lossy(&b).into_owned(),
            Message::Close(_) => break,
            _ => continue,
        };
        if !handle.send(client, text).await {
            break;
        }
    }
    handle.disconnect(client).await;
    writer.abort();
}

pub fn router(handle: LoopHandle) -> Router {
    Router::new().route("/ws", get(ws_handler)).route("/health", get(|| async { "ok" })).with_state(handle)
}

/// A loop plus its HTTP listener.
pub struct RunningServer {
    pub addr: SocketAddr,
    handle: LoopHandle,
    loop_task: JoinHandle<Session>,
    http_task: JoinHandle<()>,
}

impl RunningServer {
    pub async fn start(listener: TcpListener, session: Session, sink: Option<LogSink>) -> std::io::Result<Self> {
        let addr = listener.local_addr()?;
        let (handle, inbound) = LoopHandle::new();
        let loop_task = tokio::spawn(run_loop(session, inbound, sink));
        let app = router(handle.clone());
        let http_task = tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, app).await {
                tracing::error!("server stopped: {e}");
            }
        });
        tracing::info!(%addr, "lab server listening on ws://{addr}/ws");
        Ok(Self { addr, handle, loop_task, http_task })
    }

    pub fn handle(&self) -> LoopHandle {
        self.handle.clone()
    }

    /// Stops accepting connections, ends the loop and returns the session.
    pub async fn shutdown(self) -> Session {
        self.http_task.abort();
        self.handle.shutdown().await;
        self.loop_task.await.expect("simulation loop panicked")
    }
}
