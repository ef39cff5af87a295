//! Per-tick episode records and the chassis stability metric.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::RoverState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub tick: u64,
    pub state: RoverState,
    pub action: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeLog {
    /// State right after reset.
    pub initial: Option<RoverState>,
    pub records: Vec<LogRecord>,
}

impl EpisodeLog {
    pub fn start(&mut self, initial: RoverState) {
        self.initial = Some(initial);
        self.records.clear();
    }

    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }

    /// One JSON object per line, one line per tick.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Vec<LogRecord>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StabilityError {
    #[error("episode log is empty")]
    EmptyLog,
}

/// Chassis fluctuation about the longitudinal axis (|roll rate|) and the
/// lateral axis (|pitch rate|), per tick, with their RMS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySeries {
    pub longitudinal: Vec<f64>,
    pub lateral: Vec<f64>,
    pub longitudinal_rms: f64,
    pub lateral_rms: f64,
}

fn rms(series: &[f64]) -> f64 {
    (series.iter().map(|v| v * v).sum::<f64>() / series.len() as f64).sqrt()
}

pub fn stability_series(records: &[LogRecord]) -> Result<StabilitySeries, StabilityError> {
    if records.is_empty() {
        return Err(StabilityError::EmptyLog);
    }
    let longitudinal: Vec<f64> = records.iter().map(|r| r.state.roll_rate.abs()).collect();
    let lateral: Vec<f64> = records.iter().map(|r| r.state.pitch_rate.abs()).collect();
    Ok(StabilitySeries {
        longitudinal_rms: rms(&longitudinal),
        lateral_rms: rms(&lateral),
        longitudinal,
        lateral,
    })
}
