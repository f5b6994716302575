//! Versioned save/load of complete simulation state, and loading of
//! scenario documents.
//!
//! Saves are JSON. Floats are written in shortest round-trip form and parsed
//! back exactly, so a loaded simulation continues on bit-identical
//! trajectories. RNG streams are stored by key, stream id and word position.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::agent::{Controller, ControllerKind};
use crate::config::{ConfigError, ScenarioConfig};
use crate::engine::{Hierarchy, KebaParams, Koncept, KonceptId, Links, OpenBall};
use crate::rng::{RngState, RngStream};
use crate::sim::{streams, Simulation};
use crate::world::{AnimatBody, AnimatId, Locomotion, Phenomenon, Physiology, Point, World, WorldParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaveDocument {
    pub schema_version: u32,
    pub code_version: String,
    /// Ticks completed.
    pub tick: u64,
    /// Every live random stream, by name.
    pub rng: BTreeMap<String, RngState>,
    pub world: WorldState,
    pub animats: Vec<AnimatRecord>,
    /// The scenario the run started from.
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub params: WorldParams,
    pub phenomena: Vec<Phenomenon>,
    pub next_phenomenon_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimatRecord {
    pub id: AnimatId,
    pub position: Point,
    pub heading: f64,
    pub locomotion: Locomotion,
    pub physiology: Physiology,
    pub perception_radius: f64,
    pub size: f64,
    pub current_action: Action,
    #[serde(default)]
    pub death_tick: Option<u64>,
    pub controller: ControllerKind,
    /// Present exactly for KEBA controllers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<HierarchyDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDump {
    pub params: KebaParams,
    pub noise_floor_follows_world: bool,
    #[serde(default)]
    pub refused_creations: u64,
    /// Koncepts per level, protokoncepts first, in storage order.
    pub levels: Vec<Vec<KonceptRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KonceptRecord {
    pub id: u32,
    pub level: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parents: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    pub v: f64,
    pub a: f64,
    pub a_prev: f64,
    pub s: f64,
    pub links: Links,
}

impl KonceptRecord {
    pub fn from_koncept(k: &Koncept) -> Self {
        Self {
            id: k.id.0,
            level: k.level,
            parents: k.parents.iter().map(|p| p.0).collect(),
            center: k.ball.as_ref().map(|b| b.center.clone()),
            r1: k.ball.as_ref().map(|b| b.r1),
            r2: k.ball.as_ref().map(|b| b.r2),
            v: k.v,
            a: k.a,
            a_prev: k.a_prev,
            s: k.s,
            links: k.links,
        }
    }

    fn into_koncept(self, path: &str) -> Result<Koncept, LoadError> {
        let ball = match (self.center, self.r1, self.r2) {
            (None, None, None) => None,
            (Some(center), Some(r1), Some(r2)) => Some(OpenBall { center, r1, r2 }),
            _ => {
                return Err(LoadError::Invariant {
                    path: path.into(),
                    reason: "center, r1 and r2 must be given together".into(),
                })
            }
        };
        Ok(Koncept {
            id: KonceptId(self.id),
            level: self.level,
            parents: self.parents.into_iter().map(KonceptId).collect(),
            ball,
            v: self.v,
            a: self.a,
            a_prev: self.a_prev,
            s: self.s,
            links: self.links,
        })
    }
}

impl HierarchyDump {
    pub fn from_hierarchy(h: &Hierarchy, noise_floor_follows_world: bool) -> Self {
        Self {
            params: h.params().clone(),
            noise_floor_follows_world,
            refused_creations: h.refused_creations(),
            levels: h.levels().iter().map(|l| l.iter().map(KonceptRecord::from_koncept).collect()).collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("unsupported schema_version: expected {expected}, found {found}")]
    Version { expected: u32, found: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unknown fields: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
    #[error("missing rng state for stream `{0}`")]
    MissingRng(String),
    #[error("{path}: {reason}")]
    Invariant { path: String, reason: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, thiserror::Error)]
pub enum SaveError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot encode state: {0}")]
    Encode(String),
}

/// Deserializes `value`, reporting errors with their JSON path and
/// collecting the paths of fields the target type does not know.
fn decode<T: DeserializeOwned>(value: serde_json::Value) -> Result<(T, Vec<String>), LoadError> {
    let mut unknown = Vec::new();
    let mut record = |path: serde_ignored::Path| unknown.push(path.to_string());
    let de = serde_ignored::Deserializer::new(value, &mut record);
    let out = serde_path_to_error::deserialize(de).map_err(|e| LoadError::Field {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    Ok((out, unknown))
}

fn parse_value(text: &str) -> Result<serde_json::Value, LoadError> {
    serde_json::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

/// Parses and validates a scenario document. Unknown fields are rejected,
/// since in a hand-written scenario they are almost always typos.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, LoadError> {
    let (config, unknown): (ScenarioConfig, _) = decode(parse_value(text)?)?;
    if !unknown.is_empty() {
        return Err(LoadError::UnknownFields(unknown));
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, LoadError> {
    parse_config(&read(path)?)
}

/// A parsed save document and the unknown fields it carried.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSave {
    pub document: SaveDocument,
    pub ignored_fields: Vec<String>,
}

/// Parses a save document. The version is checked before anything else;
/// unknown fields are ignored with a warning.
pub fn parse_document(text: &str) -> Result<ParsedSave, LoadError> {
    let value = parse_value(text)?;
    match value.get("schema_version") {
        Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
        Some(v) => return Err(LoadError::Version { expected: SCHEMA_VERSION, found: v.to_string() }),
        None => return Err(LoadError::Version { expected: SCHEMA_VERSION, found: "nothing".into() }),
    }
    let (document, ignored_fields) = decode::<SaveDocument>(value)?;
    for field in &ignored_fields {
        tracing::warn!(field, "ignoring unknown field in save document");
    }
    Ok(ParsedSave { document, ignored_fields })
}

fn rng_name_for(kind: ControllerKind, i: usize) -> Option<String> {
    (kind != ControllerKind::None).then(|| streams::controller(i))
}

/// Captures the complete state of `sim`. Call between ticks.
pub fn save_state(sim: &Simulation) -> SaveDocument {
    let mut rng = BTreeMap::new();
    let mut put = |s: &RngStream| {
        rng.insert(s.name().to_string(), s.state());
    };
    put(&sim.world.spawn_rng);
    put(&sim.event_rng);
    put(&sim.command_rng);
    let mut animats = Vec::with_capacity(sim.world.animats.len());
    for (body, controller) in sim.world.animats.iter().zip(&sim.controllers) {
        put(&body.motion_rng);
        put(&body.sensor_rng);
        let hierarchy = match controller {
            Controller::Keba { hierarchy, noise_floor_follows_world } => {
                put(hierarchy.link_rng());
                Some(HierarchyDump::from_hierarchy(hierarchy, *noise_floor_follows_world))
            }
            Controller::Random { rng } => {
                put(rng);
                None
            }
            Controller::None => None,
        };
        animats.push(AnimatRecord {
            id: body.id,
            position: body.position,
            heading: body.heading,
            locomotion: body.locomotion,
            physiology: body.physiology,
            perception_radius: body.perception_radius,
            size: body.size,
            current_action: body.current_action,
            death_tick: body.death_tick,
            controller: controller.kind(),
            hierarchy,
        });
    }
    SaveDocument {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.to_string(),
        tick: sim.tick,
        rng,
        world: WorldState {
            params: sim.world.params.clone(),
            phenomena: sim.world.phenomena.clone(),
            next_phenomenon_id: sim.world.next_phenomenon_id,
        },
        animats,
        config: sim.config.clone(),
    }
}

fn stream(rng: &BTreeMap<String, RngState>, name: &str) -> Result<RngStream, LoadError> {
    let state = rng.get(name).ok_or_else(|| LoadError::MissingRng(name.to_string()))?;
    RngStream::from_state(name, state).map_err(|e| LoadError::Field { path: format!("rng.{name}"), message: e.to_string() })
}

fn invariant(path: impl Into<String>, reason: impl Into<String>) -> LoadError {
    LoadError::Invariant { path: path.into(), reason: reason.into() }
}

/// Rebuilds a simulation, checking every structural invariant first.
pub fn load_state(doc: SaveDocument) -> Result<Simulation, LoadError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(LoadError::Version { expected: SCHEMA_VERSION, found: doc.schema_version.to_string() });
    }
    doc.config.validate()?;
    doc.world.params.validate().map_err(|e| invariant("world.params", e.to_string()))?;
    if doc.animats.len() != doc.config.animats.len() {
        return Err(invariant(
            "animats",
            format!("{} animats saved but the scenario declares {}", doc.animats.len(), doc.config.animats.len()),
        ));
    }
    if doc.tick > doc.config.ticks {
        return Err(invariant("tick", format!("{} lies beyond the scenario's {} ticks", doc.tick, doc.config.ticks)));
    }

    let (w, h) = (doc.world.params.width, doc.world.params.height);
    let mut seen = std::collections::HashSet::new();
    for (i, p) in doc.world.phenomena.iter().enumerate() {
        let path = format!("world.phenomena[{i}]");
        if !p.position.in_bounds(w, h) {
            return Err(invariant(format!("{path}.position"), "outside the world"));
        }
        if p.id.0 >= doc.world.next_phenomenon_id || !seen.insert(p.id) {
            return Err(invariant(format!("{path}.id"), format!("id {} is duplicated or not yet issued", p.id.0)));
        }
        if !(p.size.is_finite() && p.size >= 0.0) {
            return Err(invariant(format!("{path}.size"), "must be finite and non-negative"));
        }
    }

    let mut world = World::new(doc.world.params, stream(&doc.rng, streams::SPAWN)?);
    world.phenomena = doc.world.phenomena;
    world.next_phenomenon_id = doc.world.next_phenomenon_id;

    let mut controllers = Vec::with_capacity(doc.animats.len());
    for (i, rec) in doc.animats.into_iter().enumerate() {
        let path = format!("animats[{i}]");
        if rec.id != AnimatId(i as u32) {
            return Err(invariant(format!("{path}.id"), format!("expected {}, found {}", AnimatId(i as u32), rec.id)));
        }
        if rec.controller != doc.config.animats[i].controller {
            return Err(invariant(format!("{path}.controller"), "differs from the scenario"));
        }
        if !rec.position.in_bounds(w, h) {
            return Err(invariant(format!("{path}.position"), "outside the world"));
        }
        if !rec.heading.is_finite() {
            return Err(invariant(format!("{path}.heading"), "must be finite"));
        }
        let ph = rec.physiology;
        for (name, x) in [("energy", ph.energy), ("hunger", ph.hunger), ("thirst", ph.thirst)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(invariant(format!("{path}.physiology.{name}"), format!("{x} outside [0, 1]")));
            }
        }
        if ph.alive == rec.death_tick.is_some() {
            return Err(invariant(format!("{path}.death_tick"), "must be set exactly when the animat is dead"));
        }

        let rng_name = rng_name_for(rec.controller, i);
        let controller = match (rec.controller, rec.hierarchy) {
            (ControllerKind::Keba, Some(dump)) => {
                let mut levels = Vec::with_capacity(dump.levels.len());
                for (n, level) in dump.levels.into_iter().enumerate() {
                    let mut out = Vec::with_capacity(level.len());
                    for (pos, k) in level.into_iter().enumerate() {
                        out.push(k.into_koncept(&format!("{path}.hierarchy.levels[{n}][{pos}]"))?);
                    }
                    levels.push(out);
                }
                let link_rng = stream(&doc.rng, rng_name.as_deref().expect("keba owns a stream"))?;
                let hierarchy = Hierarchy::from_parts(dump.params, levels, link_rng, dump.refused_creations)
                    .map_err(|e| invariant(format!("{path}.hierarchy"), e.to_string()))?;
                Controller::Keba { hierarchy: Box::new(hierarchy), noise_floor_follows_world: dump.noise_floor_follows_world }
            }
            (ControllerKind::Keba, None) => return Err(invariant(format!("{path}.hierarchy"), "missing for a KEBA animat")),
            (_, Some(_)) => return Err(invariant(format!("{path}.hierarchy"), "only KEBA animats carry a hierarchy")),
            (ControllerKind::Random, None) => Controller::Random { rng: stream(&doc.rng, &streams::controller(i))? },
            (ControllerKind::None, None) => Controller::None,
        };
        world.animats.push(AnimatBody {
            id: rec.id,
            position: rec.position,
            heading: rec.heading,
            locomotion: rec.locomotion,
            physiology: rec.physiology,
            perception_radius: rec.perception_radius,
            size: rec.size,
            current_action: rec.current_action,
            death_tick: rec.death_tick,
            motion_rng: stream(&doc.rng, &streams::motion(i))?,
            sensor_rng: stream(&doc.rng, &streams::sensor(i))?,
        });
        controllers.push(controller);
    }

    Ok(Simulation {
        config: doc.config,
        tick: doc.tick,
        world,
        controllers,
        event_rng: stream(&doc.rng, streams::EVENTS)?,
        command_rng: stream(&doc.rng, streams::COMMANDS)?,
    })
}

pub fn to_json(doc: &SaveDocument) -> Result<String, SaveError> {
    serde_json::to_string_pretty(doc).map_err(|e| SaveError::Encode(e.to_string()))
}

/// Saves `sim` to `path`; the file appears whole or not at all.
pub fn save_to_file(sim: &Simulation, path: &Path) -> Result<(), SaveError> {
    let text = to_json(&save_state(sim))?;
    crate::atomic::write_atomic(path, text.as_bytes()).map_err(|source| SaveError::Io { path: path.to_path_buf(), source })
}

pub fn load_from_file(path: &Path) -> Result<Simulation, LoadError> {
    load_state(parse_document(&read(path)?)?.document)
}
