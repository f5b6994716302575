//! Declarative scenario description.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::agent::ControllerKind;
use crate::engine::KebaParams;
use crate::world::{Locomotion, PhenomenonKind, Point, WorldParams};

/// Partial [`KebaParams`]; unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KebaOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation_potential: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub persistence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_r2: Option<f64>,
    /// When unset, the noise floor tracks the world's sensor noise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_koncepts_per_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub medium_none_link: Option<bool>,
}

impl KebaOverrides {
    /// `self` layered over `other`.
    pub fn or(&self, other: &KebaOverrides) -> KebaOverrides {
        KebaOverrides {
            activation_potential: self.activation_potential.or(other.activation_potential),
            persistence: self.persistence.or(other.persistence),
            stability_speed: self.stability_speed.or(other.stability_speed),
            center_rate: self.center_rate.or(other.center_rate),
            radius_rate: self.radius_rate.or(other.radius_rate),
            initial_r1: self.initial_r1.or(other.initial_r1),
            initial_r2: self.initial_r2.or(other.initial_r2),
            noise_floor: self.noise_floor.or(other.noise_floor),
            max_levels: self.max_levels.or(other.max_levels),
            max_koncepts_per_level: self.max_koncepts_per_level.or(other.max_koncepts_per_level),
            active_threshold: self.active_threshold.or(other.active_threshold),
            medium_none_link: self.medium_none_link.or(other.medium_none_link),
        }
    }

    pub fn resolve(&self, noise_amplitude: f64) -> KebaParams {
        let d = KebaParams::default();
        KebaParams {
            activation_potential: self.activation_potential.unwrap_or(d.activation_potential),
            persistence: self.persistence.unwrap_or(d.persistence),
            stability_speed: self.stability_speed.unwrap_or(d.stability_speed),
            center_rate: self.center_rate.unwrap_or(d.center_rate),
            radius_rate: self.radius_rate.unwrap_or(d.radius_rate),
            initial_r1: self.initial_r1.unwrap_or(d.initial_r1),
            initial_r2: self.initial_r2.unwrap_or(d.initial_r2),
            noise_floor: self.noise_floor.unwrap_or(noise_amplitude),
            max_levels: self.max_levels.unwrap_or(d.max_levels),
            max_koncepts_per_level: self.max_koncepts_per_level.unwrap_or(d.max_koncepts_per_level),
            active_threshold: self.active_threshold.unwrap_or(d.active_threshold),
            medium_none_link: self.medium_none_link.unwrap_or(d.medium_none_link),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimatSpec {
    pub controller: ControllerKind,
    #[serde(default = "default_locomotion")]
    pub locomotion: Locomotion,
    /// Random when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Point>,
    /// Random when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    #[serde(default)]
    pub keba: KebaOverrides,
}

fn default_locomotion() -> Locomotion {
    Locomotion::Wander
}

impl AnimatSpec {
    pub fn new(controller: ControllerKind) -> Self {
        Self { controller, locomotion: Locomotion::Wander, position: None, heading: None, keba: KebaOverrides::default() }
    }
}

/// One or more phenomena placed at a fixed tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnEvent {
    /// 0 places the phenomena before the first tick.
    #[serde(default)]
    pub tick: u64,
    pub kind: PhenomenonKind,
    /// Random when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Point>,
    #[serde(default = "one")]
    pub count: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsSpec {
    /// Keep the per-tick, per-animat series (summaries are always kept).
    pub series: bool,
    /// Record every n-th tick of the series.
    pub every: u64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self { series: true, every: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jsonl: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    pub ticks: u64,
    #[serde(default)]
    pub world: WorldParams,
    /// Engine settings shared by every KEBA animat.
    #[serde(default)]
    pub keba: KebaOverrides,
    pub animats: Vec<AnimatSpec>,
    #[serde(default)]
    pub spawns: Vec<SpawnEvent>,
    #[serde(default)]
    pub metrics: MetricsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid scenario: {}", .problems.join("; "))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl ScenarioConfig {
    pub fn new(seed: u64, ticks: u64, animats: Vec<AnimatSpec>) -> Self {
        Self {
            name: String::new(),
            seed,
            ticks,
            world: WorldParams::default(),
            keba: KebaOverrides::default(),
            animats,
            spawns: Vec::new(),
            metrics: MetricsSpec::default(),
            output: OutputSpec::default(),
        }
    }

    /// Fully resolved engine parameters for animat `i`.
    pub fn keba_params(&self, i: usize) -> KebaParams {
        self.animats[i].keba.or(&self.keba).resolve(self.world.noise_amplitude)
    }

    pub fn noise_floor_follows_world(&self, i: usize) -> bool {
        self.animats[i].keba.or(&self.keba).noise_floor.is_none()
    }

    /// Every problem found, so a bad file is fixed in one pass.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if let Err(e) = self.world.validate() {
            problems.push(e.to_string());
        }
        if self.animats.is_empty() {
            problems.push("animats: at least one animat is required".into());
        }
        for (i, spec) in self.animats.iter().enumerate() {
            if spec.controller == ControllerKind::Keba {
                if let Err(e) = self.keba_params(i).validate() {
                    problems.push(format!("animats[{i}].keba: {e}"));
                }
            }
            if let Some(p) = spec.position {
                if !p.in_bounds(self.world.width, self.world.height) {
                    problems.push(format!("animats[{i}].position: ({}, {}) lies outside the world", p.x, p.y));
                }
            }
            if spec.heading.is_some_and(|h| !h.is_finite()) {
                problems.push(format!("animats[{i}].heading: must be finite"));
            }
        }
        for (i, ev) in self.spawns.iter().enumerate() {
            if let Some(p) = ev.position {
                if !p.in_bounds(self.world.width, self.world.height) {
                    problems.push(format!("spawns[{i}].position: ({}, {}) lies outside the world", p.x, p.y));
                }
            }
        }
        if self.metrics.every == 0 {
            problems.push("metrics.every: must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { problems })
        }
    }
}
