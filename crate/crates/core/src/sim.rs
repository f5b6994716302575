//! A complete simulation: world, controllers, schedule and the fixed tick
//! order that makes runs reproducible from their seed.

use std::f64::consts::TAU;

use crate::agent::{tick_animat, Controller, ControllerKind, TickTrace};
use crate::config::{ConfigError, ScenarioConfig};
use crate::engine::Hierarchy;
use crate::rng::RngStream;
use crate::world::{AnimatId, Locomotion, PhenomenonId, PhenomenonKind, Point, World};

pub mod streams {
    //! Names of the random streams a simulation owns.

    pub const SPAWN: &str = "world.spawn";
    pub const EVENTS: &str = "world.events";
    pub const COMMANDS: &str = "lab.commands";
    pub const SETUP: &str = "world.setup";

    pub fn motion(animat: usize) -> String {
        format!("animat.{animat}.motion")
    }

    pub fn sensor(animat: usize) -> String {
        format!("animat.{animat}.sensor")
    }

    pub fn controller(animat: usize) -> String {
        format!("animat.{animat}.controller")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub config: ScenarioConfig,
    /// Ticks completed so far.
    pub tick: u64,
    pub world: World,
    /// Indexed like `world.animats`.
    pub controllers: Vec<Controller>,
    /// Positions for scheduled spawns without a fixed position.
    pub event_rng: RngStream,
    /// Positions for interactive spawns without a fixed position.
    pub command_rng: RngStream,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("unknown phenomenon {0}")]
    UnknownPhenomenon(PhenomenonId),
    #[error("unknown animat {0}")]
    UnknownAnimat(AnimatId),
    #[error("animat {0} is dead")]
    DeadAnimat(AnimatId),
    #[error("noise amplitude {0} lies outside [0, 1]")]
    NoiseRange(f64),
    #[error("position ({}, {}) lies outside the world", .0.x, .0.y)]
    OutOfBounds(Point),
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let seed = config.seed;
        let mut world = World::new(config.world.clone(), RngStream::new(seed, streams::SPAWN));
        let mut setup = RngStream::new(seed, streams::SETUP);

        let mut controllers = Vec::with_capacity(config.animats.len());
        for (i, spec) in config.animats.iter().enumerate() {
            let position = spec.position.unwrap_or_else(|| world.random_position(&mut setup));
            let heading = spec.heading.unwrap_or_else(|| setup.uniform(0.0, TAU));
            world.add_animat(
                position,
                heading,
                spec.locomotion,
                RngStream::new(seed, streams::motion(i)),
                RngStream::new(seed, streams::sensor(i)),
            );
            let rng = RngStream::new(seed, streams::controller(i));
            let controller = match spec.controller {
                ControllerKind::Keba => {
                    let hierarchy = Hierarchy::new(config.keba_params(i), rng)
                        .map_err(|e| ConfigError { problems: vec![format!("animats[{i}].keba: {e}")] })?;
                    Controller::Keba {
                        hierarchy: Box::new(hierarchy),
                        noise_floor_follows_world: config.noise_floor_follows_world(i),
                    }
                }
                ControllerKind::Random => Controller::Random { rng },
                ControllerKind::None => Controller::None,
            };
            controllers.push(controller);
        }

        for ev in config.spawns.iter().filter(|e| e.tick == 0) {
            for _ in 0..ev.count {
                let at = ev.position.unwrap_or_else(|| world.random_position(&mut setup));
                world.spawn(ev.kind, at);
            }
        }

        Ok(Self {
            tick: 0,
            world,
            controllers,
            event_rng: RngStream::new(seed, streams::EVENTS),
            command_rng: RngStream::new(seed, streams::COMMANDS),
            config,
        })
    }

    pub fn all_dead(&self) -> bool {
        self.world.animats.iter().all(|b| !b.alive())
    }

    /// Reached the configured tick count or nobody is left alive.
    pub fn finished(&self) -> bool {
        self.tick >= self.config.ticks || self.all_dead()
    }

    /// Advances one tick: scheduled spawns, then the world, then each animat
    /// in ascending id order. Returns a trace per animat alive at the start
    /// of the tick.
    pub fn step(&mut self) -> Vec<TickTrace> {
        self.tick += 1;
        let tick = self.tick;
        for ev in self.config.spawns.iter().filter(|e| e.tick == tick) {
            for _ in 0..ev.count {
                let at = ev.position.unwrap_or_else(|| self.world.random_position(&mut self.event_rng));
                self.world.spawn(ev.kind, at);
            }
        }
        self.world.step();
        let mut traces = Vec::with_capacity(self.controllers.len());
        for (who, controller) in self.controllers.iter_mut().enumerate() {
            if self.world.animats[who].alive() {
                traces.push(tick_animat(&mut self.world, who, controller, tick));
            }
        }
        traces
    }

    pub fn run_to_end(&mut self) {
        while !self.finished() {
            self.step();
        }
    }

    pub fn spawn(&mut self, kind: PhenomenonKind, position: Option<Point>) -> Result<PhenomenonId, SimError> {
        let at = match position {
            Some(p) if !p.in_bounds(self.world.params.width, self.world.params.height) => {
                return Err(SimError::OutOfBounds(p))
            }
            Some(p) => p,
            None => self.world.random_position(&mut self.command_rng),
        };
        Ok(self.world.spawn(kind, at))
    }

    pub fn delete(&mut self, id: PhenomenonId) -> Result<(), SimError> {
        if self.world.remove(id) {
            Ok(())
        } else {
            Err(SimError::UnknownPhenomenon(id))
        }
    }

    pub fn set_locomotion(&mut self, id: AnimatId, mode: Locomotion) -> Result<(), SimError> {
        let body = self.world.animats.get_mut(id.0 as usize).ok_or(SimError::UnknownAnimat(id))?;
        if !body.alive() {
            return Err(SimError::DeadAnimat(id));
        }
        body.locomotion = mode;
        Ok(())
    }

    pub fn set_noise(&mut self, amplitude: f64) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(SimError::NoiseRange(amplitude));
        }
        self.world.params.noise_amplitude = amplitude;
        for c in &mut self.controllers {
            c.sync_noise_floor(amplitude);
        }
        Ok(())
    }
}
