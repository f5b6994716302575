use serde::{Deserialize, Serialize};

use super::phenomenon::KindTable;

/// Ticks a lightning lives before it turns into rain.
pub const LIGHTNING_TTL: u64 = 10;
/// Ticks a rain lives before it turns into food.
pub const RAIN_TTL: u64 = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    pub width: f64,
    pub height: f64,
    /// Amplitude of the additive uniform sensor noise.
    pub noise_amplitude: f64,
    pub hunger_rate: f64,
    pub thirst_rate: f64,
    pub high_threshold: f64,
    pub low_threshold: f64,
    /// Energy lost per tick for each of hunger and thirst above the high threshold.
    pub energy_drain: f64,
    /// Energy regained per tick while hunger and thirst are both below the low threshold.
    pub energy_gain: f64,
    pub eat_relief: f64,
    pub drink_relief: f64,
    pub penalty: f64,
    pub food_shrink: f64,
    pub predation_drain: f64,
    /// Probability per tick that a lightning strikes somewhere.
    pub spawn_rate: f64,
    pub wander_sigma: f64,
    pub circle_turn: f64,
    pub speed: f64,
    pub perception_radius: f64,
    pub kinds: KindTable,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            width: 100.0,
            height: 100.0,
            noise_amplitude: 0.0,
            hunger_rate: 1.0 / 1000.0,
            thirst_rate: 1.0 / 1000.0,
            high_threshold: 0.5,
            low_threshold: 0.2,
            energy_drain: 1.0 / 8000.0,
            energy_gain: 1.0 / 8000.0,
            eat_relief: 0.1,
            drink_relief: 0.1,
            penalty: 0.05,
            food_shrink: 0.1,
            predation_drain: 0.05,
            spawn_rate: 0.01,
            wander_sigma: 0.3,
            circle_turn: 0.1,
            speed: 0.5,
            perception_radius: 10.0,
            kinds: KindTable::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("world.{field}: {reason}")]
pub struct WorldParamError {
    pub field: &'static str,
    pub reason: String,
}

impl WorldParams {
    pub fn validate(&self) -> Result<(), WorldParamError> {
        let fail = |field: &'static str, reason: &str| Err(WorldParamError { field, reason: reason.into() });
        if !(self.width.is_finite() && self.width > 0.0) {
            return fail("width", "must be positive");
        }
        if !(self.height.is_finite() && self.height > 0.0) {
            return fail("height", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.noise_amplitude) {
            return fail("noise_amplitude", "must lie in [0, 1]");
        }
        if !(0.0 < self.low_threshold && self.low_threshold < self.high_threshold && self.high_threshold < 1.0) {
            return fail("high_threshold", "thresholds must satisfy 0 < low < high < 1");
        }
        let rates = [
            ("hunger_rate", self.hunger_rate),
            ("thirst_rate", self.thirst_rate),
            ("energy_drain", self.energy_drain),
            ("energy_gain", self.energy_gain),
            ("eat_relief", self.eat_relief),
            ("drink_relief", self.drink_relief),
            ("penalty", self.penalty),
            ("food_shrink", self.food_shrink),
            ("predation_drain", self.predation_drain),
            ("wander_sigma", self.wander_sigma),
            ("speed", self.speed),
        ];
        for (field, x) in rates {
            if !(x.is_finite() && x >= 0.0) {
                return fail(field, "must be a non-negative number");
            }
        }
        if !self.circle_turn.is_finite() {
            return fail("circle_turn", "must be finite");
        }
        if !(0.0..=1.0).contains(&self.spawn_rate) {
            return fail("spawn_rate", "is a probability and must lie in [0, 1]");
        }
        if !(self.perception_radius.is_finite() && self.perception_radius > 0.0) {
            return fail("perception_radius", "must be positive");
        }
        let k = &self.kinds;
        for (field, spec) in [
            ("kinds.food", &k.food),
            ("kinds.rock", &k.rock),
            ("kinds.rain", &k.rain),
            ("kinds.lightning", &k.lightning),
            ("kinds.animat", &k.animat),
        ] {
            if !(spec.size.is_finite() && spec.size > 0.0) {
                return fail(field, "size must be positive");
            }
            if !spec.qualia.is_valid() {
                return fail(field, "qualia must lie in [0, 1]");
            }
        }
        Ok(())
    }
}
