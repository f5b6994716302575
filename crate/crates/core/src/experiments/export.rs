//! Writes metrics logs to disk. Files appear whole or not at all.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use super::{MetricsLog, RunSummary, SeriesRow};
use crate::action::StimulusSign;

pub const CSV_HEADER: [&str; 10] =
    ["tick", "animat", "controller", "alive", "energy", "hunger", "thirst", "action", "stimulus", "koncepts"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricsFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for MetricsFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" | "json-lines" | "json_lines" => Ok(Self::JsonLines),
            other => Err(format!("unknown metrics format `{other}` (csv, jsonl)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot encode metrics: {0}")]
    Encode(String),
}

fn sign(s: StimulusSign) -> &'static str {
    match s {
        StimulusSign::Positive => "positive",
        StimulusSign::Negative => "negative",
        StimulusSign::None => "none",
    }
}

fn csv_bytes(series: &[SeriesRow]) -> Result<Vec<u8>, ExportError> {
    let enc = |e: csv::Error| ExportError::Encode(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(enc)?;
    for r in series {
        let koncepts = r.koncepts.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            r.tick.to_string(),
            r.animat.0.to_string(),
            r.controller.as_str().to_string(),
            r.alive.to_string(),
            r.energy.to_string(),
            r.hunger.to_string(),
            r.thirst.to_string(),
            r.action.as_str().to_string(),
            sign(r.stimulus).to_string(),
            koncepts,
        ])
        .map_err(enc)?;
    }
    w.into_inner().map_err(|e| ExportError::Encode(e.to_string()))
}

fn jsonl_bytes(series: &[SeriesRow]) -> Result<Vec<u8>, ExportError> {
    let mut out = Vec::new();
    for r in series {
        serde_json::to_writer(&mut out, r).map_err(|e| ExportError::Encode(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExportError> {
    crate::atomic::write_atomic(path, bytes).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

/// Writes the per-tick series: one row per animat per recorded tick, in a
/// fixed column order.
pub fn export_metrics(log: &MetricsLog, format: MetricsFormat, path: &Path) -> Result<(), ExportError> {
    let bytes = match format {
        MetricsFormat::Csv => csv_bytes(&log.series)?,
        MetricsFormat::JsonLines => jsonl_bytes(&log.series)?,
    };
    write_atomic(path, &bytes)
}

/// Writes the run summary as pretty JSON.
pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<(), ExportError> {
    let bytes = serde_json::to_vec_pretty(summary).map_err(|e| ExportError::Encode(e.to_string()))?;
    write_atomic(path, &bytes)
}
