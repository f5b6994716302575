//! Command logs: the starting state plus every state-changing command with
//! the tick boundary it was applied at. Replaying a log with the same code
//! reproduces the session exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use keba::persistence::{self, SaveDocument};
use keba::sim::Simulation;
use serde::{Deserialize, Serialize};

use crate::protocol::Command;
use crate::session::apply_to_sim;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum LogEntry {
    Start { state: Box<SaveDocument> },
    /// Applied after `tick` completed ticks.
    Command { tick: u64, command: Command },
    End { tick: u64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommandLog {
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("log must begin with a start entry")]
    NoStart,
    #[error("entry {index}: tick {tick} lies before tick {now}")]
    OutOfOrder { index: usize, tick: u64, now: u64 },
    #[error("entry {index}: {reason}")]
    Command { index: usize, reason: String },
    #[error("start state: {0}")]
    Start(#[from] persistence::LoadError),
}

impl CommandLog {
    pub fn start(sim: &Simulation) -> Self {
        Self { entries: vec![LogEntry::Start { state: Box::new(persistence::save_state(sim)) }] }
    }

    pub fn push(&mut self, tick: u64, command: Command) {
        self.entries.push(LogEntry::Command { tick, command });
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("log entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, ReplayError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| ReplayError::Parse { line: i + 1, reason: e.to_string() }))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, ReplayError> {
        let file = File::open(path).map_err(|source| ReplayError::Io { path: path.to_path_buf(), source })?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            text.push_str(&line.map_err(|source| ReplayError::Io { path: path.to_path_buf(), source })?);
            text.push('\n');
        }
        Self::from_jsonl(&text)
    }

    /// Rebuilds the session's simulation. Without an end entry the replay
    /// stops after the last command.
    pub fn replay(&self) -> Result<Simulation, ReplayError> {
        let Some(LogEntry::Start { state }) = self.entries.first() else {
            return Err(ReplayError::NoStart);
        };
        let mut sim = persistence::load_state((**state).clone())?;
        for (index, entry) in self.entries.iter().enumerate().skip(1) {
            let target = match entry {
                LogEntry::Command { tick, .. } | LogEntry::End { tick } => *tick,
                LogEntry::Start { .. } => return Err(ReplayError::Command { index, reason: "second start entry".into() }),
            };
            if target < sim.tick {
                return Err(ReplayError::OutOfOrder { index, tick: target, now: sim.tick });
            }
            while sim.tick < target {
                sim.step();
            }
            if let LogEntry::Command { command, .. } = entry {
                apply_to_sim(&mut sim, command).map_err(|reason| ReplayError::Command { index, reason })?;
            }
        }
        Ok(sim)
    }
}

/// Appends log entries to a file as they happen, one JSON object per line.
#[derive(Debug)]
pub struct LogSink {
    out: BufWriter<File>,
    written: usize,
}

impl LogSink {
    pub fn create(path: &Path) -> std::io::Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?), written: 0 })
    }

    /// Writes the entries of `log` not yet written.
    pub fn sync(&mut self, log: &CommandLog) -> std::io::Result<()> {
        if self.written == log.entries.len() {
            return Ok(());
        }
        for e in &log.entries[self.written..] {
            serde_json::to_writer(&mut self.out, e)?;
            self.out.write_all(b"\n")?;
        }
        self.written = log.entries.len();
        self.out.flush()
    }

    pub fn close(mut self, log: &CommandLog, tick: u64) -> std::io::Result<()> {
        self.sync(log)?;
        serde_json::to_writer(&mut self.out, &LogEntry::End { tick })?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}
