//! Wire messages. Every message is one JSON object per WebSocket text frame.
//!
//! Client to server: `{"seq": 7, "cmd": "set_noise", "amplitude": 0.25}`.
//! Server to client: objects tagged by `type`: `hello`, `ack`, `error` or
//! `snapshot`.

use std::path::PathBuf;

use keba::agent::TickTrace;
use keba::persistence::HierarchyDump;
use keba::world::{AnimatId, Locomotion, PhenomenonId, PhenomenonKind, Point};
use keba::{Action, ControllerKind};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    /// Random position when `position` is absent.
    SpawnPhenomenon {
        kind: PhenomenonKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Point>,
    },
    DeletePhenomenon {
        id: PhenomenonId,
    },
    SetLocomotion {
        animat: AnimatId,
        mode: Locomotion,
    },
    SetNoise {
        amplitude: f64,
    },
    Pause,
    Resume,
    /// Advance exactly `count` ticks; only while paused.
    Step {
        count: u64,
    },
    SetSpeed {
        ticks_per_second: f64,
    },
    Save {
        path: PathBuf,
    },
    Load {
        path: PathBuf,
    },
    /// Replaces this client's snapshot channels.
    Subscribe {
        channels: Vec<Channel>,
    },
    /// One snapshot now, optionally with a full koncept dump of `hierarchy`.
    Snapshot {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hierarchy: Option<AnimatId>,
    },
}

impl Command {
    /// Whether the command changes simulation state, and so belongs in the
    /// command log.
    pub fn mutates_simulation(&self) -> bool {
        matches!(
            self,
            Command::SpawnPhenomenon { .. }
                | Command::DeletePhenomenon { .. }
                | Command::SetLocomotion { .. }
                | Command::SetNoise { .. }
                | Command::Load { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    /// Chosen by the client; echoed in the matching ack or error.
    pub seq: u64,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Phenomena and animat bodies.
    World,
    /// Koncept counts per level for each KEBA animat.
    Koncepts,
    /// What each animat did during the last tick.
    Traces,
}

pub const DEFAULT_CHANNELS: [Channel; 2] = [Channel::World, Channel::Koncepts];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Well-formed but not applicable (unknown id, out of range, wrong state).
    Rejected,
    /// Not a valid message.
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        protocol_version: u32,
        tick: u64,
        paused: bool,
        ticks_per_second: f64,
    },
    /// The command took effect at the boundary after `tick` completed ticks.
    Ack {
        seq: u64,
        tick: u64,
    },
    Error {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seq: Option<u64>,
        kind: ErrorKind,
        reason: String,
    },
    Snapshot(Snapshot),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhenomenonView {
    pub id: PhenomenonId,
    pub kind: PhenomenonKind,
    pub position: Point,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimatView {
    pub id: AnimatId,
    pub controller: ControllerKind,
    pub position: Point,
    pub heading: f64,
    pub locomotion: Locomotion,
    pub alive: bool,
    pub energy: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KonceptSummary {
    pub animat: AnimatId,
    /// Koncepts per level, protokoncepts first.
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyView {
    pub animat: AnimatId,
    pub dump: HierarchyDump,
}

/// State after `tick` completed ticks. Sections for channels the client did
/// not subscribe to are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u64,
    /// Wall-clock milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub paused: bool,
    pub finished: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phenomena: Option<Vec<PhenomenonView>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub animats: Option<Vec<AnimatView>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub koncepts: Option<Vec<KonceptSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<TickTrace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyView>,
}

/// Parses a client message. On failure the error carries the client's
/// `seq` when one could be read.
pub fn parse_request(text: &str) -> Result<Request, ServerMessage> {
    let protocol = |seq, reason: String| ServerMessage::Error { seq, kind: ErrorKind::Protocol, reason };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| protocol(None, format!("malformed JSON: {e}")))?;
    let seq = value.get("seq").and_then(serde_json::Value::as_u64);
    serde_json::from_value(value).map_err(|e| protocol(seq, e.to_string()))
}
