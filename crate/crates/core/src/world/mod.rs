//! The toroidal environment: phenomena and their transitions, animat bodies,
//! physiology, perception and the effect of actions.

mod geometry;
mod params;
mod phenomenon;

pub use geometry::{toroidal_distance, Point};
pub use params::{WorldParamError, WorldParams, LIGHTNING_TTL, RAIN_TTL};
pub use phenomenon::{KindSpec, KindTable, Phenomenon, PhenomenonId, PhenomenonKind, Qualia};

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::action::{Action, Stimulus};
use crate::engine::PROTO_COUNT;
use crate::rng::RngStream;

/// Food at or below this size is gone.
const EXHAUSTED_FOOD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnimatId(pub u32);

impl fmt::Display for AnimatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locomotion {
    Wander,
    Circular,
    Static,
}

impl FromStr for Locomotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wander" => Ok(Self::Wander),
            "circular" => Ok(Self::Circular),
            "static" => Ok(Self::Static),
            other => Err(format!("unknown locomotion `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physiology {
    pub energy: f64,
    pub hunger: f64,
    pub thirst: f64,
    pub alive: bool,
}

impl Default for Physiology {
    fn default() -> Self {
        Self { energy: 1.0, hunger: 0.0, thirst: 0.0, alive: true }
    }
}

impl Physiology {
    fn clamp(&mut self) {
        self.energy = self.energy.clamp(0.0, 1.0);
        self.hunger = self.hunger.clamp(0.0, 1.0);
        self.thirst = self.thirst.clamp(0.0, 1.0);
    }

    fn die_if_exhausted(&mut self, tick: u64, death_tick: &mut Option<u64>) {
        if self.alive && self.energy <= 0.0 {
            self.alive = false;
            *death_tick = Some(tick);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnimatBody {
    pub id: AnimatId,
    pub position: Point,
    /// Radians.
    pub heading: f64,
    pub locomotion: Locomotion,
    pub physiology: Physiology,
    pub perception_radius: f64,
    pub size: f64,
    pub current_action: Action,
    pub death_tick: Option<u64>,
    pub motion_rng: RngStream,
    pub sensor_rng: RngStream,
}

impl AnimatBody {
    pub fn alive(&self) -> bool {
        self.physiology.alive
    }
}

/// Something the animat is in contact with.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Contact {
    Phenomenon { index: usize, kind: PhenomenonKind, distance: f64 },
    Animat { index: usize, distance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub params: WorldParams,
    pub phenomena: Vec<Phenomenon>,
    pub animats: Vec<AnimatBody>,
    pub next_phenomenon_id: u64,
    pub spawn_rng: RngStream,
}

impl World {
    pub fn new(params: WorldParams, spawn_rng: RngStream) -> Self {
        Self { params, phenomena: Vec::new(), animats: Vec::new(), next_phenomenon_id: 0, spawn_rng }
    }

    pub fn distance(&self, p: Point, q: Point) -> f64 {
        toroidal_distance(p, q, self.params.width, self.params.height)
    }

    pub fn phenomenon(&self, id: PhenomenonId) -> Option<&Phenomenon> {
        self.phenomena.iter().find(|p| p.id == id)
    }

    pub fn spawn(&mut self, kind: PhenomenonKind, position: Point) -> PhenomenonId {
        let spec = *self.params.kinds.get(kind);
        let id = PhenomenonId(self.next_phenomenon_id);
        self.next_phenomenon_id += 1;
        self.phenomena.push(Phenomenon {
            id,
            kind,
            position: position.wrapped(self.params.width, self.params.height),
            size: spec.size,
            age: 0,
            qualia: spec.qualia,
        });
        id
    }

    pub fn remove(&mut self, id: PhenomenonId) -> bool {
        let before = self.phenomena.len();
        self.phenomena.retain(|p| p.id != id);
        self.phenomena.len() != before
    }

    pub fn random_position(&self, rng: &mut RngStream) -> Point {
        Point::new(rng.uniform(0.0, self.params.width), rng.uniform(0.0, self.params.height))
    }

    /// Adds an animat body; ids follow insertion order.
    pub fn add_animat(
        &mut self,
        position: Point,
        heading: f64,
        locomotion: Locomotion,
        motion_rng: RngStream,
        sensor_rng: RngStream,
    ) -> AnimatId {
        let id = AnimatId(self.animats.len() as u32);
        self.animats.push(AnimatBody {
            id,
            position: position.wrapped(self.params.width, self.params.height),
            heading,
            locomotion,
            physiology: Physiology::default(),
            perception_radius: self.params.perception_radius,
            size: self.params.kinds.animat.size,
            current_action: Action::None,
            death_tick: None,
            motion_rng,
            sensor_rng,
        });
        id
    }

    /// Ages phenomena and applies their transitions, clears exhausted food,
    /// lets the spawner strike, then moves every living animat.
    pub fn step(&mut self) {
        let kinds = self.params.kinds.clone();
        for p in &mut self.phenomena {
            p.age += 1;
            let next = match p.kind {
                PhenomenonKind::Lightning if p.age >= LIGHTNING_TTL => Some(PhenomenonKind::Rain),
                PhenomenonKind::Rain if p.age >= RAIN_TTL => Some(PhenomenonKind::Food),
                _ => None,
            };
            if let Some(kind) = next {
                let spec = kinds.get(kind);
                p.kind = kind;
                p.age = 0;
                p.size = spec.size;
                p.qualia = spec.qualia;
            }
        }
        self.phenomena.retain(|p| !(p.kind == PhenomenonKind::Food && p.size <= EXHAUSTED_FOOD));

        if self.spawn_rng.chance(self.params.spawn_rate) {
            let x = self.spawn_rng.uniform(0.0, self.params.width);
            let y = self.spawn_rng.uniform(0.0, self.params.height);
            self.spawn(PhenomenonKind::Lightning, Point::new(x, y));
        }

        let (w, h) = (self.params.width, self.params.height);
        for body in self.animats.iter_mut().filter(|b| b.alive()) {
            let turn = match body.locomotion {
                Locomotion::Static => continue,
                Locomotion::Wander => {
                    let sigma = self.params.wander_sigma;
                    body.motion_rng.uniform(-sigma, sigma)
                }
                Locomotion::Circular => self.params.circle_turn,
            };
            body.heading = (body.heading + turn).rem_euclid(TAU);
            let step = Point::new(
                body.position.x + self.params.speed * body.heading.cos(),
                body.position.y + self.params.speed * body.heading.sin(),
            );
            body.position = step.wrapped(w, h);
        }
    }

    fn contacts(&self, who: usize) -> Vec<Contact> {
        let me = &self.animats[who];
        let mut out = Vec::new();
        for (index, p) in self.phenomena.iter().enumerate() {
            let distance = self.distance(me.position, p.position);
            if distance <= me.size + p.size {
                out.push(Contact::Phenomenon { index, kind: p.kind, distance });
            }
        }
        for (index, other) in self.animats.iter().enumerate() {
            if index == who || !other.alive() {
                continue;
            }
            let distance = self.distance(me.position, other.position);
            if distance <= me.size + other.size {
                out.push(Contact::Animat { index, distance });
            }
        }
        out
    }

    /// The 15-channel protokoncept input of animat `who`: six distal qualia
    /// attenuated by distance, three contact qualia, energy, hunger, thirst
    /// and a one-hot of the current action, each with additive uniform noise
    /// and clamped to `[0, 1]`.
    pub fn perceive(&mut self, who: usize) -> [f64; PROTO_COUNT] {
        let mut x = [0.0; PROTO_COUNT];
        let me = &self.animats[who];
        let radius = me.perception_radius;
        let mut sense = |qualia: &Qualia, distance: f64, touch_range: f64| {
            let q = qualia.to_array();
            if distance < radius {
                let gain = 1.0 - distance / radius;
                for c in 0..Qualia::DISTAL {
                    x[c] = f64::max(x[c], q[c] * gain);
                }
            }
            if distance <= touch_range {
                for c in Qualia::DISTAL..Qualia::CHANNELS {
                    x[c] = f64::max(x[c], q[c]);
                }
            }
        };
        for p in &self.phenomena {
            sense(&p.qualia, self.distance(me.position, p.position), me.size + p.size);
        }
        let animat_qualia = self.params.kinds.animat.qualia;
        for (i, other) in self.animats.iter().enumerate() {
            if i != who && other.alive() {
                sense(&animat_qualia, self.distance(me.position, other.position), me.size + other.size);
            }
        }
        let ph = me.physiology;
        x[9] = ph.energy;
        x[10] = ph.hunger;
        x[11] = ph.thirst;
        x[12 + me.current_action.index()] = 1.0;

        let noise = self.params.noise_amplitude;
        let rng = &mut self.animats[who].sensor_rng;
        for c in &mut x {
            let jitter = (2.0 * rng.unit() - 1.0) * noise;
            *c = (*c + jitter).clamp(0.0, 1.0);
        }
        x
    }

    /// Executes `action` for animat `who` against whatever it touches.
    pub fn apply_action(&mut self, who: usize, action: Action, tick: u64) -> Stimulus {
        self.animats[who].current_action = action;
        if action == Action::None {
            return Stimulus::NONE;
        }
        let contacts = self.contacts(who);
        if contacts.is_empty() {
            return Stimulus::NONE;
        }
        let nearest = |want: &dyn Fn(&Contact) -> bool| {
            contacts
                .iter()
                .filter(|c| want(c))
                .min_by(|a, b| contact_distance(a).total_cmp(&contact_distance(b)))
                .copied()
        };
        let params = self.params.clone();
        let stimulus = match action {
            Action::Eat => {
                let food = nearest(&|c| matches!(c, Contact::Phenomenon { kind: PhenomenonKind::Food, .. }));
                let prey = nearest(&|c| matches!(c, Contact::Animat { .. }));
                if let Some(Contact::Phenomenon { index, .. }) = food {
                    self.phenomena[index].size -= params.food_shrink;
                    self.animats[who].physiology.hunger -= params.eat_relief;
                    Stimulus::positive(params.eat_relief)
                } else if let Some(Contact::Animat { index, .. }) = prey {
                    let victim = &mut self.animats[index];
                    victim.physiology.energy -= params.predation_drain;
                    victim.physiology.clamp();
                    victim.physiology.die_if_exhausted(tick, &mut victim.death_tick);
                    self.animats[who].physiology.hunger -= params.eat_relief;
                    Stimulus::positive(params.eat_relief)
                } else {
                    self.animats[who].physiology.hunger += params.penalty;
                    Stimulus::negative(params.penalty)
                }
            }
            Action::Drink => {
                let rain = nearest(&|c| matches!(c, Contact::Phenomenon { kind: PhenomenonKind::Rain, .. }));
                if rain.is_some() {
                    self.animats[who].physiology.thirst -= params.drink_relief;
                    Stimulus::positive(params.drink_relief)
                } else {
                    self.animats[who].physiology.thirst += params.penalty;
                    Stimulus::negative(params.penalty)
                }
            }
            Action::None => unreachable!(),
        };
        self.animats[who].physiology.clamp();
        stimulus
    }

    /// Linear hunger and thirst growth and the energy balance that follows.
    pub fn physiology_step(&mut self, who: usize, tick: u64) {
        let p = &self.params;
        let body = &mut self.animats[who];
        if !body.alive() {
            return;
        }
        let ph = &mut body.physiology;
        ph.hunger = (ph.hunger + p.hunger_rate).min(1.0);
        ph.thirst = (ph.thirst + p.thirst_rate).min(1.0);
        let high = [ph.hunger, ph.thirst].iter().filter(|&&x| x > p.high_threshold).count();
        ph.energy -= p.energy_drain * high as f64;
        if ph.hunger < p.low_threshold && ph.thirst < p.low_threshold {
            ph.energy += p.energy_gain;
        }
        ph.clamp();
        ph.die_if_exhausted(tick, &mut body.death_tick);
    }
}

fn contact_distance(c: &Contact) -> f64 {
    match c {
        Contact::Phenomenon { distance, .. } | Contact::Animat { distance, .. } => *distance,
    }
}
