//! KEBA virtual laboratory: animats that abstract hierarchical koncepts from
//! noisy perception and ground them in action through reinforcement.

pub mod action;
pub mod agent;
mod atomic;
pub mod config;
pub mod engine;
pub mod experiments;
pub mod persistence;
pub mod rng;
pub mod sim;
pub mod world;

pub use action::{Action, Stimulus, StimulusSign};
pub use agent::{Controller, ControllerKind, TickTrace};
pub use config::{AnimatSpec, ScenarioConfig};
pub use engine::{Hierarchy, KebaError, KebaParams, Koncept, KonceptId, Links};
pub use rng::RngStream;
pub use sim::Simulation;
