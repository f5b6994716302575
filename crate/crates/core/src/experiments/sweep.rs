use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_scenario, MetricsLog};
use crate::agent::ControllerKind;
use crate::config::{ConfigError, ScenarioConfig};
use crate::world::Locomotion;

/// Noise battery used when no levels are given.
pub const DEFAULT_NOISE_LEVELS: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 0.75];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Noise,
    MaxLevels,
    StabilitySpeed,
    SpawnRate,
    /// Every animat's locomotion, coded 0 = wander, 1 = circular, 2 = static.
    Locomotion,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Noise => "noise",
            SweepParam::MaxLevels => "max_levels",
            SweepParam::StabilitySpeed => "stability_speed",
            SweepParam::SpawnRate => "spawn_rate",
            SweepParam::Locomotion => "locomotion",
        }
    }

    /// Writes `value` into `config`. Engine parameters go to the shared
    /// KEBA settings and to every animat override.
    pub fn apply(self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::Noise => config.world.noise_amplitude = value,
            SweepParam::SpawnRate => config.world.spawn_rate = value,
            SweepParam::Locomotion => {
                let mode = match value.round() as i64 {
                    1 => Locomotion::Circular,
                    2 => Locomotion::Static,
                    _ => Locomotion::Wander,
                };
                for a in &mut config.animats {
                    a.locomotion = mode;
                }
            }
            SweepParam::MaxLevels => {
                let levels = value.round().max(0.0) as usize;
                config.keba.max_levels = Some(levels);
                for a in &mut config.animats {
                    if a.keba.max_levels.is_some() {
                        a.keba.max_levels = Some(levels);
                    }
                }
            }
            SweepParam::StabilitySpeed => {
                config.keba.stability_speed = Some(value);
                for a in &mut config.animats {
                    if a.keba.stability_speed.is_some() {
                        a.keba.stability_speed = Some(value);
                    }
                }
            }
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noise" => Ok(Self::Noise),
            "max_levels" | "levels" => Ok(Self::MaxLevels),
            "stability_speed" | "kappa" => Ok(Self::StabilitySpeed),
            "spawn_rate" => Ok(Self::SpawnRate),
            "locomotion" => Ok(Self::Locomotion),
            other => Err(format!(
                "unknown sweep parameter `{other}` (noise, max_levels, stability_speed, spawn_rate, locomotion)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Precondition(String),
}

/// Mean, standard deviation and median of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
}

impl Spread {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 0 { (sorted[mid - 1] + sorted[mid]) / 2.0 } else { sorted[mid] };
        Self { mean, sd: var.sqrt(), median }
    }
}

/// Aggregates over all seeds at one parameter value. Per-seed figures
/// average over the KEBA animats of the run (all animats if there are none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: SweepParam,
    pub value: f64,
    pub seeds: Vec<u64>,
    /// Koncepts above the protokoncept level, per seed.
    pub koncepts: Vec<f64>,
    pub survival: Vec<f64>,
    pub koncepts_spread: Spread,
    pub survival_spread: Spread,
}

fn focus(log: &MetricsLog) -> (f64, f64) {
    let animats = &log.summary.animats;
    let keba: Vec<_> = animats.iter().filter(|a| a.controller == ControllerKind::Keba).collect();
    let chosen: Vec<_> = if keba.is_empty() { animats.iter().collect() } else { keba };
    let n = chosen.len().max(1) as f64;
    let koncepts = chosen.iter().map(|a| a.koncepts_per_level.iter().skip(1).sum::<usize>() as f64).sum::<f64>() / n;
    let survival = chosen.iter().map(|a| a.survival as f64).sum::<f64>() / n;
    (koncepts, survival)
}

fn summary_only(mut config: ScenarioConfig, seed: u64) -> ScenarioConfig {
    config.seed = seed;
    config.metrics.series = false;
    config
}

/// Runs every `(value, seed)` pair, in parallel. Results are gathered in
/// input order, so aggregates do not depend on scheduling.
pub fn sweep(base: &ScenarioConfig, param: SweepParam, values: &[f64], seeds: &[u64]) -> Result<Vec<SweepPoint>, SweepError> {
    if values.is_empty() || seeds.is_empty() {
        return Err(SweepError::Precondition("a sweep needs at least one value and one seed".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..values.len()).flat_map(|v| seeds.iter().map(move |&s| (v, s))).collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            let mut config = summary_only(base.clone(), seed);
            param.apply(&mut config, values[v]);
            run_scenario(config).map(|log| focus(&log))
        })
        .collect::<Result<_, _>>()?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(v, &value)| {
            let chunk = &results[v * seeds.len()..(v + 1) * seeds.len()];
            let koncepts: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let survival: Vec<f64> = chunk.iter().map(|r| r.1).collect();
            SweepPoint {
                param,
                value,
                seeds: seeds.to_vec(),
                koncepts_spread: Spread::of(&koncepts),
                survival_spread: Spread::of(&survival),
                koncepts,
                survival,
            }
        })
        .collect())
}

/// [`sweep`] over sensor noise; needs at least three levels including 0.
pub fn noise_sweep(base: &ScenarioConfig, levels: &[f64], seeds: &[u64]) -> Result<Vec<SweepPoint>, SweepError> {
    if levels.len() < 3 || !levels.contains(&0.0) {
        return Err(SweepError::Precondition("a noise sweep needs at least three levels, one of them 0".into()));
    }
    sweep(base, SweepParam::Noise, levels, seeds)
}

/// One controller kind across all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub controller: ControllerKind,
    /// Per seed, mean over the run's animats.
    pub survival: Vec<f64>,
    pub final_quarter_hunger: Vec<f64>,
    pub survival_spread: Spread,
    pub hunger_spread: Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub seeds: Vec<u64>,
    pub rows: Vec<BaselineRow>,
}

impl BaselineReport {
    pub fn row(&self, kind: ControllerKind) -> &BaselineRow {
        self.rows.iter().find(|r| r.controller == kind).expect("every controller kind is run")
    }

    /// Fraction of seeds on which `a` outlived `b`.
    pub fn outlives(&self, a: ControllerKind, b: ControllerKind) -> f64 {
        let (a, b) = (&self.row(a).survival, &self.row(b).survival);
        a.iter().zip(b).filter(|(x, y)| x > y).count() as f64 / a.len().max(1) as f64
    }
}

/// Runs `base` once per seed with every animat switched to each of the
/// three controllers.
pub fn compare_baselines(base: &ScenarioConfig, seeds: &[u64]) -> Result<BaselineReport, SweepError> {
    if seeds.is_empty() {
        return Err(SweepError::Precondition("at least one seed is required".into()));
    }
    let kinds = [ControllerKind::None, ControllerKind::Random, ControllerKind::Keba];
    let jobs: Vec<(ControllerKind, u64)> = kinds.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let mut config = summary_only(base.clone(), seed);
            for a in &mut config.animats {
                a.controller = kind;
            }
            run_scenario(config).map(|log| {
                let animats = &log.summary.animats;
                let n = animats.len() as f64;
                (
                    animats.iter().map(|a| a.survival as f64).sum::<f64>() / n,
                    animats.iter().map(|a| a.final_quarter_hunger).sum::<f64>() / n,
                )
            })
        })
        .collect::<Result<_, _>>()?;
    let rows = kinds
        .iter()
        .enumerate()
        .map(|(k, &controller)| {
            let chunk = &results[k * seeds.len()..(k + 1) * seeds.len()];
            let survival: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let hunger: Vec<f64> = chunk.iter().map(|r| r.1).collect();
            BaselineRow {
                controller,
                survival_spread: Spread::of(&survival),
                hunger_spread: Spread::of(&hunger),
                survival,
                final_quarter_hunger: hunger,
            }
        })
        .collect();
    Ok(BaselineReport { seeds: seeds.to_vec(), rows })
}
