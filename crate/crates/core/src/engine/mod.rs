//! The koncept engine: recursive abstraction of fuzzy open balls over
//! protokoncept activations, their plasticity, and their links to actions.

pub mod dynamics;
mod hierarchy;
mod koncept;
mod params;

pub use dynamics::{adapt_center, adapt_radii, membership, update_activation, update_stability, RadiusRule};
pub use hierarchy::{Hierarchy, PropagationReport, StepReport, Vote, PROTO_COUNT};
pub use koncept::{init_links, Koncept, KonceptId, Links, OpenBall, MEDIUM_LINK};
pub use params::KebaParams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KebaError {
    #[error("invalid radii: r1 = {r1} must be positive and below r2 = {r2}")]
    InvalidRadii { r1: f64, r2: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("protokoncept input has {found} channels, expected {expected}")]
    InputDimension { expected: usize, found: usize },
    #[error("protokoncept input channel {channel} = {value} lies outside [0, 1]")]
    InputRange { channel: usize, value: f64 },
    #[error("level {0} does not exist")]
    MissingLevel(usize),
    #[error("level {level} exceeds max_levels = {max_levels}")]
    LevelCap { level: usize, max_levels: usize },
    #[error("{path}: {reason}")]
    Invariant { path: String, reason: String },
}
