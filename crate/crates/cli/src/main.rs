use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use keba::experiments::{self, MetricsFormat, MetricsLog, SweepParam, DEFAULT_NOISE_LEVELS};
use keba::persistence;
use keba::{ControllerKind, ScenarioConfig, Simulation};
use keba_lab_server::{CommandLog, LogSink, RunningServer, Session};

#[derive(Parser)]
#[command(name = "keba-lab", version, about = "KEBA virtual laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario to completion and write its metrics.
    Run {
        config: PathBuf,
        /// Per-tick series as CSV (overrides the scenario's `output.csv`).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-tick series as JSON lines.
        #[arg(long)]
        jsonl: Option<PathBuf>,
        /// Run summary as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Save the final simulation state.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Run a scenario over several values of one parameter and several seeds.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "noise")]
        param: SweepParam,
        /// Comma-separated values; the default noise battery when omitted.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Write the full table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario with every animat as KEBA, random and no-action.
    CompareBaselines {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the interactive laboratory server.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Scenario to start from.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Resume a saved simulation instead.
        #[arg(long, conflicts_with = "scenario")]
        load: Option<PathBuf>,
        /// No server: run the scenario to completion, as `run` does.
        #[arg(long)]
        headless: bool,
        /// Append every state-changing command to this log.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Start paused.
        #[arg(long)]
        paused: bool,
    },
    /// Rebuild a recorded session from its command log.
    Replay {
        log: PathBuf,
        /// Write the final state here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Cmd::Run { config, csv, jsonl, summary, save } => run(&config, csv, jsonl, summary, save),
        Cmd::Sweep { config, param, values, seeds, out } => sweep(&config, param, values, seeds, out),
        Cmd::CompareBaselines { config, seeds, out } => compare(&config, seeds, out),
        Cmd::Serve { port, scenario, load, headless, record, paused } => {
            if headless {
                let Some(scenario) = scenario else { bail!("--headless needs --scenario") };
                return run(&scenario, None, None, None, None);
            }
            let sim = match (scenario, load) {
                (Some(s), _) => Simulation::new(load_config(&s)?)?,
                (None, Some(l)) => persistence::load_from_file(&l).with_context(|| format!("loading {}", l.display()))?,
                (None, None) => bail!("serve needs --scenario or --load"),
            };
            serve(port, sim, record, paused)
        }
        Cmd::Replay { log, save } => {
            let sim = CommandLog::read(&log)?.replay()?;
            println!("replayed to tick {}", sim.tick);
            if let Some(path) = save {
                persistence::save_to_file(&sim, &path)?;
            }
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    persistence::load_config(path).with_context(|| format!("loading {}", path.display()))
}

fn print_summary(log: &MetricsLog) {
    println!("scenario {:?} seed {} ran {} ticks", log.summary.name, log.summary.seed, log.summary.ticks_run);
    for a in &log.summary.animats {
        let death = a.death_tick.map_or("alive".to_string(), |t| format!("died at {t}"));
        println!(
            "  {} {:<6} {death:<14} koncepts/level {:?} final-quarter hunger {:.3}",
            a.animat,
            a.controller.as_str(),
            a.koncepts_per_level,
            a.final_quarter_hunger
        );
    }
}

fn run(config: &Path, csv: Option<PathBuf>, jsonl: Option<PathBuf>, summary: Option<PathBuf>, save: Option<PathBuf>) -> Result<()> {
    let config = load_config(config)?;
    let outputs = config.output.clone();
    let (sim, log) = experiments::run_simulation(config)?;
    print_summary(&log);
    if let Some(p) = csv.or(outputs.csv) {
        experiments::export_metrics(&log, MetricsFormat::Csv, &p)?;
    }
    if let Some(p) = jsonl.or(outputs.jsonl) {
        experiments::export_metrics(&log, MetricsFormat::JsonLines, &p)?;
    }
    if let Some(p) = summary.or(outputs.summary) {
        experiments::write_summary(&log.summary, &p)?;
    }
    if let Some(p) = save {
        persistence::save_to_file(&sim, &p)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))
}

fn sweep(config: &Path, param: SweepParam, values: Vec<f64>, seeds: u64, out: Option<PathBuf>) -> Result<()> {
    let base = load_config(config)?;
    let values = if values.is_empty() && param == SweepParam::Noise { DEFAULT_NOISE_LEVELS.to_vec() } else { values };
    let seeds: Vec<u64> = (0..seeds).collect();
    let table = experiments::sweep(&base, param, &values, &seeds)?;
    println!("{:>10} {:>20} {:>20} {:>10}", param.as_str(), "koncepts (mean±sd)", "survival (mean±sd)", "median");
    for p in &table {
        println!(
            "{:>10} {:>20} {:>20} {:>10}",
            p.value,
            format!("{:.1}±{:.1}", p.koncepts_spread.mean, p.koncepts_spread.sd),
            format!("{:.0}±{:.0}", p.survival_spread.mean, p.survival_spread.sd),
            p.survival_spread.median
        );
    }
    if let Some(path) = out {
        write_json(&path, &table)?;
    }
    Ok(())
}

fn compare(config: &Path, seeds: u64, out: Option<PathBuf>) -> Result<()> {
    let base = load_config(config)?;
    let seeds: Vec<u64> = (0..seeds).collect();
    let report = experiments::compare_baselines(&base, &seeds)?;
    println!("{:>8} {:>16} {:>10} {:>22}", "control", "survival mean", "median", "final-quarter hunger");
    for r in &report.rows {
        println!(
            "{:>8} {:>16.1} {:>10} {:>22.3}",
            r.controller.as_str(),
            r.survival_spread.mean,
            r.survival_spread.median,
            r.hunger_spread.mean
        );
    }
    use ControllerKind::*;
    println!("random dies before no-action on {:.0}% of seeds", 100.0 * report.outlives(None, Random));
    println!("KEBA outlives no-action on {:.0}% of seeds", 100.0 * report.outlives(Keba, None));
    println!("KEBA outlives random on {:.0}% of seeds", 100.0 * report.outlives(Keba, Random));
    if let Some(path) = out {
        write_json(&path, &report)?;
    }
    Ok(())
}

fn serve(port: u16, sim: Simulation, record: Option<PathBuf>, paused: bool) -> Result<()> {
    let sink = record.map(|p| LogSink::create(&p).with_context(|| format!("creating {}", p.display()))).transpose()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
        let server = RunningServer::start(listener, Session::new(sim, paused), sink).await?;
        println!("listening on ws://{}/ws", server.addr);
        tokio::signal::ctrl_c().await?;
        let session = server.shutdown().await;
        tracing::info!(tick = session.tick(), "stopped");
        Ok(())
    })
}
