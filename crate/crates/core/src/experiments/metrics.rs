//! Per-tick series and per-run summaries.

use serde::{Deserialize, Serialize};

use crate::action::{Action, StimulusSign};
use crate::agent::{ControllerKind, TickTrace};
use crate::sim::Simulation;
use crate::world::AnimatId;

/// One animat at one tick, after the tick completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub tick: u64,
    pub animat: AnimatId,
    pub controller: ControllerKind,
    pub alive: bool,
    pub energy: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub action: Action,
    pub stimulus: StimulusSign,
    /// Koncepts per level, protokoncepts first. Empty for non-KEBA controllers.
    pub koncepts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimatSummary {
    pub animat: AnimatId,
    pub controller: ControllerKind,
    /// First tick at which energy reached zero.
    pub death_tick: Option<u64>,
    /// Ticks lived: the death tick, or the number of ticks run.
    pub survival: u64,
    pub total_koncepts: usize,
    pub koncepts_per_level: Vec<usize>,
    /// Mean `r2` per level above the protokoncepts.
    pub mean_r2_per_level: Vec<f64>,
    /// Mean hunger over the last quarter of the animat's life.
    pub final_quarter_hunger: f64,
    pub positive_stimuli: u64,
    pub negative_stimuli: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub ticks_run: u64,
    pub animats: Vec<AnimatSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub series: Vec<SeriesRow>,
    pub summary: RunSummary,
}

impl MetricsLog {
    pub fn animat(&self, id: AnimatId) -> impl Iterator<Item = &SeriesRow> {
        self.series.iter().filter(move |r| r.animat == id)
    }
}

/// Accumulates a [`MetricsLog`] while a simulation runs.
#[derive(Debug, Clone)]
pub struct Recorder {
    keep_series: bool,
    every: u64,
    series: Vec<SeriesRow>,
    hunger: Vec<Vec<f64>>,
    positive: Vec<u64>,
    negative: Vec<u64>,
}

impl Recorder {
    pub fn new(sim: &Simulation) -> Self {
        let n = sim.world.animats.len();
        Self {
            keep_series: sim.config.metrics.series,
            every: sim.config.metrics.every.max(1),
            series: Vec::new(),
            hunger: vec![Vec::new(); n],
            positive: vec![0; n],
            negative: vec![0; n],
        }
    }

    /// Records the traces of the tick `sim` just completed.
    pub fn observe(&mut self, sim: &Simulation, traces: &[TickTrace]) {
        for t in traces {
            let i = t.animat.0 as usize;
            let body = &sim.world.animats[i];
            self.hunger[i].push(body.physiology.hunger);
            match t.stimulus.sign {
                StimulusSign::Positive => self.positive[i] += 1,
                StimulusSign::Negative => self.negative[i] += 1,
                StimulusSign::None => {}
            }
            if self.keep_series && t.tick % self.every == 0 {
                self.series.push(SeriesRow {
                    tick: t.tick,
                    animat: t.animat,
                    controller: sim.controllers[i].kind(),
                    alive: t.alive,
                    energy: body.physiology.energy,
                    hunger: body.physiology.hunger,
                    thirst: body.physiology.thirst,
                    action: t.action,
                    stimulus: t.stimulus.sign,
                    koncepts: t.koncept_counts.clone(),
                });
            }
        }
    }

    pub fn finish(self, sim: &Simulation) -> MetricsLog {
        let animats = sim
            .world
            .animats
            .iter()
            .zip(&sim.controllers)
            .enumerate()
            .map(|(i, (body, controller))| {
                let counts = controller.koncept_counts();
                let mean_r2_per_level = controller
                    .hierarchy()
                    .map(|h| {
                        h.levels()
                            .iter()
                            .skip(1)
                            .map(|level| {
                                let sum: f64 = level.iter().filter_map(|k| k.ball.as_ref()).map(|b| b.r2).sum();
                                sum / level.len().max(1) as f64
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                let hunger = &self.hunger[i];
                let tail = &hunger[hunger.len() - hunger.len() / 4..];
                let final_quarter_hunger = if tail.is_empty() {
                    hunger.last().copied().unwrap_or(body.physiology.hunger)
                } else {
                    tail.iter().sum::<f64>() / tail.len() as f64
                };
                AnimatSummary {
                    animat: body.id,
                    controller: controller.kind(),
                    death_tick: body.death_tick,
                    survival: body.death_tick.unwrap_or(sim.tick),
                    total_koncepts: counts.iter().sum(),
                    koncepts_per_level: counts,
                    mean_r2_per_level,
                    final_quarter_hunger,
                    positive_stimuli: self.positive[i],
                    negative_stimuli: self.negative[i],
                }
            })
            .collect();
        MetricsLog {
            series: self.series,
            summary: RunSummary {
                name: sim.config.name.clone(),
                seed: sim.config.seed,
                ticks_run: sim.tick,
                animats,
            },
        }
    }
}
