use serde::{Deserialize, Serialize};

use super::KebaError;

/// Constants of one koncept hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KebaParams {
    /// A: raised to the level, it weights the previous activation.
    pub activation_potential: f64,
    /// ι: persistence of past activation.
    pub persistence: f64,
    /// κ: how fast stability recovers.
    pub stability_speed: f64,
    /// η: step size of center adaptation.
    pub center_rate: f64,
    /// ζ: step size of radius adaptation.
    pub radius_rate: f64,
    pub initial_r1: f64,
    pub initial_r2: f64,
    /// Radius adaptation only happens for distances above this value.
    pub noise_floor: f64,
    /// Number of levels allowed above the protokoncepts.
    pub max_levels: usize,
    pub max_koncepts_per_level: usize,
    /// A koncept counts as active when `a` is strictly above this.
    pub active_threshold: f64,
    /// Draw the `none` link like the others. When false it starts at 0, so
    /// `none` is chosen only when nothing supports eating or drinking.
    pub medium_none_link: bool,
}

impl Default for KebaParams {
    fn default() -> Self {
        Self {
            activation_potential: 2.0,
            persistence: 1.0,
            stability_speed: 0.18,
            center_rate: 0.05,
            radius_rate: 0.005,
            initial_r1: 0.1,
            initial_r2: 0.25,
            noise_floor: 0.0,
            max_levels: 3,
            max_koncepts_per_level: 512,
            active_threshold: 0.0,
            medium_none_link: false,
        }
    }
}

impl KebaParams {
    pub fn validate(&self) -> Result<(), KebaError> {
        let bad = |what: &str| Err(KebaError::InvalidParams(what.to_string()));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.activation_potential) {
            return bad("activation_potential must be positive");
        }
        if !positive(self.persistence) {
            return bad("persistence must be positive");
        }
        if !(0.0..=1.0).contains(&self.stability_speed) {
            return bad("stability_speed must lie in [0, 1]");
        }
        if !(self.center_rate > 0.0 && self.center_rate <= 1.0) {
            return bad("center_rate must lie in (0, 1]");
        }
        if !positive(self.radius_rate) {
            return bad("radius_rate must be positive");
        }
        if !(positive(self.initial_r1) && positive(self.initial_r2) && self.initial_r1 < self.initial_r2) {
            return bad("initial radii must satisfy 0 < initial_r1 < initial_r2");
        }
        if !(0.0..=1.0).contains(&self.noise_floor) {
            return bad("noise_floor must lie in [0, 1]");
        }
        if self.max_koncepts_per_level == 0 {
            return bad("max_koncepts_per_level must be at least 1");
        }
        if !self.active_threshold.is_finite() || !(0.0..1.0).contains(&self.active_threshold) {
            return bad("active_threshold must lie in [0, 1)");
        }
        Ok(())
    }

    /// Aⁿ·ι, the weight of the previous activation at `level`.
    pub fn memory_weight(&self, level: usize) -> f64 {
        self.activation_potential.powi(level as i32) * self.persistence
    }
}
