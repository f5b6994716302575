//! Declarative runs, sweeps and baseline comparisons over seeds.

mod export;
mod metrics;
mod similarity;
mod sweep;

pub use export::{export_metrics, write_summary, ExportError, MetricsFormat, CSV_HEADER};
pub use metrics::{AnimatSummary, MetricsLog, Recorder, RunSummary, SeriesRow};
pub use similarity::{koncept_similarity, level_similarities, DEFAULT_SIMILARITY_TOL};
pub use sweep::{
    compare_baselines, noise_sweep, sweep, BaselineReport, BaselineRow, Spread, SweepError, SweepParam, SweepPoint,
    DEFAULT_NOISE_LEVELS,
};

use crate::config::{ConfigError, ScenarioConfig};
use crate::sim::Simulation;

/// Runs `config` to completion and returns the final simulation with its log.
pub fn run_simulation(config: ScenarioConfig) -> Result<(Simulation, MetricsLog), ConfigError> {
    let mut sim = Simulation::new(config)?;
    let mut recorder = Recorder::new(&sim);
    while !sim.finished() {
        let traces = sim.step();
        recorder.observe(&sim, &traces);
    }
    let log = recorder.finish(&sim);
    Ok((sim, log))
}

/// Runs `config` for its configured ticks or until every animat is dead.
pub fn run_scenario(config: ScenarioConfig) -> Result<MetricsLog, ConfigError> {
    run_simulation(config).map(|(_, log)| log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::ControllerKind;
    use crate::config::AnimatSpec;

    #[test]
    fn lone_idle_animat_dies_on_schedule() {
        let config = ScenarioConfig::new(0, 6000, vec![AnimatSpec::new(ControllerKind::None)]);
        let log = run_scenario(config).unwrap();
        let a = &log.summary.animats[0];
        assert_eq!(a.death_tick, Some(4500));
        assert_eq!(log.summary.ticks_run, 4500);
        assert_eq!(log.series.len(), 4500);
        assert!(log.series.windows(2).all(|w| w[1].hunger >= w[0].hunger));
    }

    #[test]
    fn row_count_is_ticks_times_animats() {
        let config = ScenarioConfig::new(
            4,
            100,
            vec![AnimatSpec::new(ControllerKind::Keba), AnimatSpec::new(ControllerKind::Random), AnimatSpec::new(ControllerKind::None)],
        );
        let log = run_scenario(config).unwrap();
        assert_eq!(log.series.len(), 300);
    }

    #[test]
    fn sampling_interval_thins_series() {
        let mut config = ScenarioConfig::new(4, 100, vec![AnimatSpec::new(ControllerKind::None)]);
        config.metrics.every = 10;
        assert_eq!(run_scenario(config.clone()).unwrap().series.len(), 10);
        config.metrics.series = false;
        let log = run_scenario(config).unwrap();
        assert!(log.series.is_empty());
        assert_eq!(log.summary.ticks_run, 100);
    }

    #[test]
    fn reruns_are_identical() {
        let config = ScenarioConfig::new(9, 400, vec![AnimatSpec::new(ControllerKind::Keba), AnimatSpec::new(ControllerKind::Random)]);
        let a = run_scenario(config.clone()).unwrap();
        let b = run_scenario(config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn invalid_config_runs_nothing() {
        let mut config = ScenarioConfig::new(0, 10, vec![AnimatSpec::new(ControllerKind::None)]);
        config.world.width = 0.0;
        assert!(run_scenario(config).is_err());
    }
}
