use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tasks::Termination;

/// One finished episode of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode: usize,
    /// Policy steps taken by the run so far, this episode included.
    pub global_step: usize,
    pub reward: f64,
    pub steps: usize,
    pub termination: Termination,
    /// Force aborts so far in the run.
    pub collisions: u64,
    pub holds_no_ik: u64,
    pub holds_velocity: u64,
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<MetricsRow>, _>>()?;
    Ok(rows)
}

/// Rows of episodes that reached a terminal state or the episode cap,
/// dropping a final episode that the run's step budget cut short.
pub fn completed_episodes(rows: &[MetricsRow], max_steps: usize) -> &[MetricsRow] {
    match rows.last() {
        Some(r) if r.termination == Termination::Timeout && r.steps < max_steps => {
            &rows[..rows.len() - 1]
        }
        _ => rows,
    }
}

/// Fraction of successful episodes among the last `window` rows.
pub fn recent_success_rate(rows: &[MetricsRow], window: usize) -> f64 {
    let tail = &rows[rows.len().saturating_sub(window)..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter()
        .filter(|r| r.termination == Termination::Success)
        .count() as f64
        / tail.len() as f64
}
