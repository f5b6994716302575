//! One steerable simulation. Commands queue up and are applied together at
//! the next tick boundary, so none ever sees a half-finished tick.

use std::collections::VecDeque;
use std::time::{SystemTime, UNIX_EPOCH};

use keba::agent::TickTrace;
use keba::persistence::{self, HierarchyDump};
use keba::sim::Simulation;
use keba::world::AnimatId;

use crate::protocol::{
    AnimatView, Channel, Command, ErrorKind, HierarchyView, KonceptSummary, PhenomenonView, ServerMessage, Snapshot,
};
use crate::record::{CommandLog, LogEntry};

pub const DEFAULT_TICKS_PER_SECOND: f64 = 30.0;

/// Applies a simulation-changing command. Shared by live sessions and
/// replay so both take the same path.
pub fn apply_to_sim(sim: &mut Simulation, command: &Command) -> Result<(), String> {
    match command {
        Command::SpawnPhenomenon { kind, position } => sim.spawn(*kind, *position).map(|_| ()).map_err(|e| e.to_string()),
        Command::DeletePhenomenon { id } => sim.delete(*id).map_err(|e| e.to_string()),
        Command::SetLocomotion { animat, mode } => sim.set_locomotion(*animat, *mode).map_err(|e| e.to_string()),
        Command::SetNoise { amplitude } => sim.set_noise(*amplitude).map_err(|e| e.to_string()),
        Command::Load { path } => {
            *sim = persistence::load_from_file(path).map_err(|e| e.to_string())?;
            Ok(())
        }
        other => Err(format!("{other:?} does not act on the simulation")),
    }
}

#[derive(Debug)]
pub struct Session {
    sim: Simulation,
    paused: bool,
    step_budget: u64,
    ticks_per_second: f64,
    pending: VecDeque<(u64, Command)>,
    last_traces: Vec<TickTrace>,
    log: CommandLog,
}

fn rejected(seq: u64, reason: impl Into<String>) -> ServerMessage {
    ServerMessage::Error { seq: Some(seq), kind: ErrorKind::Rejected, reason: reason.into() }
}

impl Session {
    pub fn new(sim: Simulation, paused: bool) -> Self {
        let log = CommandLog::start(&sim);
        Self {
            sim,
            paused,
            step_budget: 0,
            ticks_per_second: DEFAULT_TICKS_PER_SECOND,
            pending: VecDeque::new(),
            last_traces: Vec::new(),
            log,
        }
    }

    pub fn sim(&self) -> &Simulation {
        &self.sim
    }

    pub fn tick(&self) -> u64 {
        self.sim.tick
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn ticks_per_second(&self) -> f64 {
        self.ticks_per_second
    }

    pub fn log(&self) -> &CommandLog {
        &self.log
    }

    /// The log so far, closed at the current tick.
    pub fn finished_log(&self) -> CommandLog {
        let mut log = self.log.clone();
        log.entries.push(LogEntry::End { tick: self.sim.tick });
        log
    }

    pub fn hello(&self) -> ServerMessage {
        ServerMessage::Hello {
            protocol_version: crate::protocol::PROTOCOL_VERSION,
            tick: self.sim.tick,
            paused: self.paused,
            ticks_per_second: self.ticks_per_second,
        }
    }

    /// Checks `command` against the current state and queues it. Client
    /// scoped commands (`subscribe`, `snapshot`) never reach the session.
    pub fn enqueue(&mut self, seq: u64, command: Command) -> Result<(), ServerMessage> {
        let world = &self.sim.world;
        match &command {
            Command::SpawnPhenomenon { position: Some(p), .. } if !p.in_bounds(world.params.width, world.params.height) => {
                return Err(rejected(seq, format!("position ({}, {}) lies outside the world", p.x, p.y)))
            }
            Command::DeletePhenomenon { id } if world.phenomenon(*id).is_none() => {
                return Err(rejected(seq, format!("unknown phenomenon {id}")))
            }
            Command::SetLocomotion { animat, .. } => match world.animats.get(animat.0 as usize) {
                None => return Err(rejected(seq, format!("unknown animat {animat}"))),
                Some(b) if !b.alive() => return Err(rejected(seq, format!("animat {animat} is dead"))),
                _ => {}
            },
            Command::SetNoise { amplitude } if !(0.0..=1.0).contains(amplitude) => {
                return Err(rejected(seq, format!("noise amplitude {amplitude} lies outside [0, 1]")))
            }
            Command::SetSpeed { ticks_per_second } if !(ticks_per_second.is_finite() && *ticks_per_second > 0.0) => {
                return Err(rejected(seq, "ticks_per_second must be positive"))
            }
            Command::Subscribe { .. } | Command::Snapshot { .. } => {
                return Err(rejected(seq, "client-scoped command sent to the session"))
            }
            _ => {}
        }
        self.pending.push_back((seq, command));
        Ok(())
    }

    pub fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Applies every queued command in arrival order. Returns one ack or
    /// error per command.
    pub fn drain(&mut self) -> Vec<ServerMessage> {
        let mut replies = Vec::with_capacity(self.pending.len());
        while let Some((seq, command)) = self.pending.pop_front() {
            let tick = self.sim.tick;
            let outcome = match &command {
                Command::Pause => {
                    self.paused = true;
                    Ok(())
                }
                Command::Resume => {
                    self.paused = false;
                    self.step_budget = 0;
                    Ok(())
                }
                Command::Step { .. } if !self.paused => Err("step requires a paused session".to_string()),
                Command::Step { count } => {
                    self.step_budget += count;
                    Ok(())
                }
                Command::SetSpeed { ticks_per_second } => {
                    self.ticks_per_second = *ticks_per_second;
                    Ok(())
                }
                Command::Save { path } => persistence::save_to_file(&self.sim, path).map_err(|e| e.to_string()),
                other => apply_to_sim(&mut self.sim, other),
            };
            match outcome {
                Ok(()) => {
                    if command.mutates_simulation() {
                        self.log.push(tick, command.clone());
                        if matches!(command, Command::Load { .. }) {
                            self.last_traces.clear();
                        }
                    }
                    replies.push(ServerMessage::Ack { seq, tick });
                }
                Err(reason) => replies.push(rejected(seq, reason)),
            }
        }
        replies
    }

    /// Whether the next call to [`Session::advance`] would run a tick.
    pub fn tick_due(&self) -> bool {
        !self.sim.finished() && (!self.paused || self.step_budget > 0)
    }

    /// Runs one tick if one is due.
    pub fn advance(&mut self) -> bool {
        if !self.tick_due() {
            return false;
        }
        if self.paused {
            self.step_budget -= 1;
        }
        self.last_traces = self.sim.step();
        true
    }

    /// A view of the state after the last completed tick. Never mutates.
    /// Animats appear while alive and on the tick they died.
    pub fn snapshot(&self, channels: &[Channel], hierarchy: Option<AnimatId>) -> Snapshot {
        let sim = &self.sim;
        let tick = sim.tick;
        let listed = |i: usize| {
            let b = &sim.world.animats[i];
            b.alive() || b.death_tick == Some(tick)
        };
        let visible: Vec<usize> = (0..sim.world.animats.len()).filter(|&i| listed(i)).collect();
        let has = |c: Channel| channels.contains(&c);

        let phenomena = has(Channel::World).then(|| {
            sim.world
                .phenomena
                .iter()
                .map(|p| PhenomenonView { id: p.id, kind: p.kind, position: p.position, size: p.size })
                .collect()
        });
        let animats = has(Channel::World).then(|| {
            visible
                .iter()
                .map(|&i| {
                    let b = &sim.world.animats[i];
                    AnimatView {
                        id: b.id,
                        controller: sim.controllers[i].kind(),
                        position: b.position,
                        heading: b.heading,
                        locomotion: b.locomotion,
                        alive: b.alive(),
                        energy: b.physiology.energy,
                        hunger: b.physiology.hunger,
                        thirst: b.physiology.thirst,
                        action: b.current_action,
                    }
                })
                .collect()
        });
        let koncepts = has(Channel::Koncepts).then(|| {
            visible
                .iter()
                .filter_map(|&i| {
                    let h = sim.controllers[i].hierarchy()?;
                    Some(KonceptSummary { animat: sim.world.animats[i].id, counts: h.counts() })
                })
                .collect()
        });
        let traces = has(Channel::Traces).then(|| self.last_traces.iter().filter(|t| t.tick == tick).cloned().collect());
        let hierarchy = hierarchy.and_then(|id| {
            let i = id.0 as usize;
            if i >= sim.controllers.len() || !listed(i) {
                return None;
            }
            match &sim.controllers[i] {
                keba::Controller::Keba { hierarchy, noise_floor_follows_world } => {
                    Some(HierarchyView { animat: id, dump: HierarchyDump::from_hierarchy(hierarchy, *noise_floor_follows_world) })
                }
                _ => None,
            }
        });
        let timestamp_ms = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0);
        Snapshot {
            tick,
            timestamp_ms,
            paused: self.paused,
            finished: sim.finished(),
            phenomena,
            animats,
            koncepts,
            traces,
            hierarchy,
        }
    }
}
