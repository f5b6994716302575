use serde::{Deserialize, Serialize};
use tracing::debug;

use super::dynamics::{
    adapt_center, adapt_radii, euclidean, membership_unchecked, update_activation, update_stability,
};
use super::koncept::{init_links, Koncept, KonceptId, Links, OpenBall};
use super::{KebaError, KebaParams};
use crate::action::{argmax, Action, Stimulus, StimulusSign};
use crate::rng::RngStream;

/// Number of protokoncepts: 9 qualia channels, 3 internal variables and a
/// one-hot of the current action.
pub const PROTO_COUNT: usize = 15;

/// Outcome of one bottom-up pass from level `n` into level `n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PropagationReport {
    pub level: usize,
    pub gate_passed: bool,
    /// Level `n + 1` koncepts whose value came out positive.
    pub matched: Vec<KonceptId>,
    pub created: Option<KonceptId>,
    /// Creation was needed but the level was full.
    pub refused: bool,
}

/// Summary of a full engine step.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepReport {
    pub propagations: Vec<PropagationReport>,
}

impl StepReport {
    pub fn created(&self) -> impl Iterator<Item = KonceptId> + '_ {
        self.propagations.iter().filter_map(|p| p.created)
    }

    /// Levels above zero whose values were recomputed this step.
    pub fn refreshed_levels(&self) -> Vec<usize> {
        self.propagations.iter().filter(|p| p.gate_passed).map(|p| p.level + 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vote {
    pub action: Action,
    pub scores: [f64; Action::COUNT],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    level: u32,
    pos: u32,
}

/// A growing stack of koncept levels over the 15 protokoncepts.
///
/// Single-owner state machine: all mutation goes through `&mut self`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    params: KebaParams,
    levels: Vec<Vec<Koncept>>,
    slots: Vec<Slot>,
    link_rng: RngStream,
    refused_creations: u64,
}

impl Hierarchy {
    pub fn new(params: KebaParams, mut link_rng: RngStream) -> Result<Self, KebaError> {
        params.validate()?;
        let protos = (0..PROTO_COUNT)
            .map(|i| Koncept {
                id: KonceptId(i as u32),
                level: 0,
                parents: Vec::new(),
                ball: None,
                v: 0.0,
                a: 0.0,
                a_prev: 0.0,
                s: 0.0,
                links: init_links(&[], params.medium_none_link, &mut link_rng),
            })
            .collect();
        let slots = (0..PROTO_COUNT).map(|i| Slot { level: 0, pos: i as u32 }).collect();
        Ok(Self { params, levels: vec![protos], slots, link_rng, refused_creations: 0 })
    }

    pub fn params(&self) -> &KebaParams {
        &self.params
    }

    pub fn levels(&self) -> &[Vec<Koncept>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> Option<&[Koncept]> {
        self.levels.get(n).map(Vec::as_slice)
    }

    pub fn koncept(&self, id: KonceptId) -> Option<&Koncept> {
        let slot = self.slots.get(id.0 as usize)?;
        Some(&self.levels[slot.level as usize][slot.pos as usize])
    }

    pub fn koncepts(&self) -> impl Iterator<Item = &Koncept> {
        self.levels.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Koncept count per level, protokoncepts first.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn refused_creations(&self) -> u64 {
        self.refused_creations
    }

    pub fn link_rng(&self) -> &RngStream {
        &self.link_rng
    }

    pub fn set_noise_floor(&mut self, noise_floor: f64) {
        self.params.noise_floor = noise_floor.clamp(0.0, 1.0);
    }

    /// Sets each protokoncept's value to its input channel and updates its
    /// activation and stability.
    pub fn ingest(&mut self, input: &[f64]) -> Result<(), KebaError> {
        if input.len() != PROTO_COUNT {
            return Err(KebaError::InputDimension { expected: PROTO_COUNT, found: input.len() });
        }
        if let Some(bad) = input.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(KebaError::InputRange { channel: bad, value: input[bad] });
        }
        let kappa = self.params.stability_speed;
        for (k, &x) in self.levels[0].iter_mut().zip(input) {
            k.a_prev = k.a;
            k.v = x;
            k.a = update_activation(k.v, k.a_prev, 0, &self.params);
            k.s = update_stability(k.s, k.a, k.a_prev, kappa);
        }
        Ok(())
    }

    /// Whether level `n` currently allows its activations to flow upward:
    /// every koncept fully stable and more than one koncept active.
    pub fn gate_open(&self, n: usize) -> bool {
        let Some(level) = self.levels.get(n) else {
            return false;
        };
        let threshold = self.params.active_threshold;
        level.iter().all(|k| k.s >= 1.0) && level.iter().filter(|k| k.a > threshold).nth(1).is_some()
    }

    /// One bottom-up pass from level `n` into level `n + 1`.
    ///
    /// When the gate at level `n` is closed, level `n + 1` is left untouched.
    pub fn propagate_level(&mut self, n: usize) -> Result<PropagationReport, KebaError> {
        if n >= self.levels.len() {
            return Err(KebaError::MissingLevel(n));
        }
        if n + 1 > self.params.max_levels {
            return Err(KebaError::LevelCap { level: n + 1, max_levels: self.params.max_levels });
        }
        let mut report = PropagationReport { level: n, ..Default::default() };
        if !self.gate_open(n) {
            return Ok(report);
        }
        report.gate_passed = true;

        if self.levels.len() == n + 1 {
            self.levels.push(Vec::new());
        }
        let (lower, upper) = self.levels.split_at_mut(n + 1);
        let below = &lower[n];
        let above = &mut upper[0];
        let slots = &self.slots;
        let activation_of = |id: KonceptId| below[slots[id.0 as usize].pos as usize].a;

        let mut scratch = Vec::new();
        for k in above.iter_mut() {
            let ball = k.ball.as_ref().expect("koncepts above level 0 carry a ball");
            scratch.clear();
            scratch.extend(k.parents.iter().map(|&p| activation_of(p)));
            let d = euclidean(&scratch, &ball.center);
            k.v = membership_unchecked(d, ball.r1, ball.r2);
            if k.v > 0.0 {
                report.matched.push(k.id);
            }
        }

        if report.matched.is_empty() {
            if above.len() >= self.params.max_koncepts_per_level {
                report.refused = true;
                self.refused_creations += 1;
                debug!(level = n + 1, cap = self.params.max_koncepts_per_level, "koncept creation refused at capacity");
            } else {
                let threshold = self.params.active_threshold;
                let active: Vec<&Koncept> = below.iter().filter(|k| k.a > threshold).collect();
                let parent_links: Vec<Links> = active.iter().map(|k| k.links).collect();
                let id = KonceptId(self.slots.len() as u32);
                let koncept = Koncept {
                    id,
                    level: n + 1,
                    parents: active.iter().map(|k| k.id).collect(),
                    ball: Some(OpenBall {
                        center: active.iter().map(|k| k.a).collect(),
                        r1: self.params.initial_r1,
                        r2: self.params.initial_r2,
                    }),
                    v: 1.0,
                    a: 0.0,
                    a_prev: 0.0,
                    s: 0.0,
                    links: init_links(&parent_links, self.params.medium_none_link, &mut self.link_rng),
                };
                self.slots.push(Slot { level: (n + 1) as u32, pos: above.len() as u32 });
                above.push(koncept);
                report.created = Some(id);
            }
        }

        let kappa = self.params.stability_speed;
        for k in above.iter_mut() {
            k.a_prev = k.a;
            k.a = update_activation(k.v, k.a_prev, n + 1, &self.params);
            k.s = update_stability(k.s, k.a, k.a_prev, kappa);
        }
        Ok(report)
    }

    /// Center and radius adaptation for every koncept on the given levels,
    /// measured against the current activations of each koncept's parents.
    /// Centers move first; radii then adapt for koncepts with a positive
    /// value whose distance exceeds the noise floor.
    pub fn plasticity(&mut self, levels: &[usize]) {
        let mut scratch = Vec::new();
        for &n in levels {
            if n == 0 || n >= self.levels.len() {
                continue;
            }
            let (lower, upper) = self.levels.split_at_mut(n);
            let below = &lower[n - 1];
            let slots = &self.slots;
            let mut distances = Vec::with_capacity(upper[0].len());
            for k in upper[0].iter_mut() {
                let ball = k.ball.as_mut().expect("koncepts above level 0 carry a ball");
                scratch.clear();
                scratch.extend(k.parents.iter().map(|&p| below[slots[p.0 as usize].pos as usize].a));
                distances.push(euclidean(&scratch, &ball.center));
                adapt_center(&mut ball.center, &scratch, k.v, self.params.center_rate);
            }
            for (k, d) in upper[0].iter_mut().zip(distances) {
                if k.v > 0.0 && d > self.params.noise_floor {
                    let ball = k.ball.as_mut().expect("koncepts above level 0 carry a ball");
                    adapt_radii(&mut ball.r1, &mut ball.r2, d, self.params.radius_rate);
                }
            }
        }
    }

    /// Ingest, bottom-up propagation as far as the gates allow, then
    /// plasticity on every refreshed level.
    pub fn step(&mut self, input: &[f64]) -> Result<StepReport, KebaError> {
        self.ingest(input)?;
        let mut report = StepReport::default();
        for n in 0..self.params.max_levels {
            if n >= self.levels.len() {
                break;
            }
            let p = self.propagate_level(n)?;
            let passed = p.gate_passed;
            report.propagations.push(p);
            if !passed {
                break;
            }
        }
        self.plasticity(&report.refreshed_levels());
        Ok(report)
    }

    /// Step reinforcement of the strongest link of every active koncept.
    ///
    /// The strongest link goes to 1 when it agrees with the outcome (it named
    /// the rewarded action, or a different action than the punished one) and
    /// to 0 otherwise.
    pub fn reinforce(&mut self, actual: Action, stimulus: Stimulus) {
        let positive = match stimulus.sign {
            StimulusSign::Positive => true,
            StimulusSign::Negative => false,
            StimulusSign::None => return,
        };
        let threshold = self.params.active_threshold;
        for k in self.levels.iter_mut().flatten().filter(|k| k.a > threshold) {
            let strongest = k.links.strongest();
            let agrees = (strongest == actual) == positive;
            k.links.set(strongest, if agrees { 1.0 } else { 0.0 });
        }
    }

    /// Every koncept with a positive value adds `v · link · (level + 1)²` to
    /// each action's score. No positive score selects `none`.
    pub fn vote(&self) -> Vote {
        let mut scores = [0.0; Action::COUNT];
        for k in self.koncepts().filter(|k| k.v > 0.0) {
            let weight = k.v * ((k.level + 1) * (k.level + 1)) as f64;
            for (score, link) in scores.iter_mut().zip(k.links.to_array()) {
                *score += weight * link;
            }
        }
        let action = if scores.iter().all(|&s| s <= 0.0) {
            Action::None
        } else {
            Action::ALL[argmax(&scores)]
        };
        Vote { action, scores }
    }

    /// Reassembles a hierarchy from stored koncepts, checking every structural
    /// and numeric invariant.
    pub fn from_parts(
        params: KebaParams,
        levels: Vec<Vec<Koncept>>,
        link_rng: RngStream,
        refused_creations: u64,
    ) -> Result<Self, KebaError> {
        params.validate()?;
        let invalid = |path: String, reason: String| Err(KebaError::Invariant { path, reason });
        if levels.len() > params.max_levels + 1 {
            return invalid(
                "levels".into(),
                format!("{} levels exceed max_levels + 1 = {}", levels.len(), params.max_levels + 1),
            );
        }
        let total: usize = levels.iter().map(Vec::len).sum();
        let mut slots: Vec<Option<Slot>> = vec![None; total];
        for (n, level) in levels.iter().enumerate() {
            if n == 0 && level.len() != PROTO_COUNT {
                return invalid("levels[0]".into(), format!("expected {PROTO_COUNT} protokoncepts, found {}", level.len()));
            }
            if n > 0 && level.is_empty() {
                return invalid(format!("levels[{n}]"), "empty level".into());
            }
            if level.len() > params.max_koncepts_per_level && n > 0 {
                return invalid(format!("levels[{n}]"), "level exceeds max_koncepts_per_level".into());
            }
            for (pos, k) in level.iter().enumerate() {
                let path = format!("levels[{n}][{pos}]");
                let idx = k.id.0 as usize;
                if idx >= total || slots[idx].is_some() {
                    return invalid(format!("{path}.id"), format!("id {} is duplicated or out of range", k.id.0));
                }
                slots[idx] = Some(Slot { level: n as u32, pos: pos as u32 });
                if k.level != n {
                    return invalid(format!("{path}.level"), format!("stored under level {n} but claims {}", k.level));
                }
                for (name, x) in [("v", k.v), ("a", k.a), ("a_prev", k.a_prev), ("s", k.s)] {
                    if !(0.0..=1.0).contains(&x) {
                        return invalid(format!("{path}.{name}"), format!("{x} outside [0, 1]"));
                    }
                }
                for a in Action::ALL {
                    let x = k.links.get(a);
                    if !(0.0..=1.0).contains(&x) {
                        return invalid(format!("{path}.links.{a}"), format!("{x} outside [0, 1]"));
                    }
                }
                match (&k.ball, n) {
                    (None, 0) if k.parents.is_empty() => {}
                    (_, 0) => return invalid(path, "protokoncepts have no parents, center or radii".into()),
                    (None, _) => return invalid(path, "missing center and radii".into()),
                    (Some(ball), _) => {
                        if k.parents.len() < 2 {
                            return invalid(format!("{path}.parents"), "needs at least two parents".into());
                        }
                        if ball.center.len() != k.parents.len() {
                            return invalid(format!("{path}.center"), "length differs from parents".into());
                        }
                        if let Some(x) = ball.center.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                            return invalid(format!("{path}.center"), format!("component {x} outside [0, 1]"));
                        }
                        if !(ball.r1 > 0.0 && ball.r1 < ball.r2 && ball.r2.is_finite()) {
                            return invalid(
                                format!("{path}.r1"),
                                format!("radii must satisfy 0 < r1 < r2 (r1 = {}, r2 = {})", ball.r1, ball.r2),
                            );
                        }
                    }
                }
            }
        }
        let slots: Vec<Slot> = match slots.into_iter().collect::<Option<Vec<_>>>() {
            Some(s) => s,
            None => return invalid("levels".into(), "koncept ids are not contiguous from 0".into()),
        };
        for (n, level) in levels.iter().enumerate().skip(1) {
            for (pos, k) in level.iter().enumerate() {
                for p in &k.parents {
                    let ok = slots.get(p.0 as usize).is_some_and(|s| s.level as usize == n - 1);
                    if !ok {
                        return invalid(format!("levels[{n}][{pos}].parents"), format!("{p} is not a level-{} koncept", n - 1));
                    }
                }
            }
        }
        Ok(Self { params, levels, slots, link_rng, refused_creations })
    }
}
