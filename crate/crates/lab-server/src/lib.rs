//! Live-control service for the KEBA laboratory: a steerable simulation
//! session, its JSON message protocol, command-log record/replay and a
//! WebSocket server.

pub mod protocol;
pub mod record;
pub mod server;
pub mod session;

pub use protocol::{Channel, Command, Request, ServerMessage, Snapshot, PROTOCOL_VERSION};
pub use record::{CommandLog, LogEntry, LogSink, ReplayError};
pub use server::{router, run_loop, LoopHandle, RunningServer};
pub use session::Session;
