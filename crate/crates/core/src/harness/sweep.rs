//! Multi-seed, multi-model sweeps and the collision comparison table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::plot::plot_runs;
use super::train::{train, RunSummary};
use crate::controllers::ActionSpaceModel;
use crate::error::Result;
use crate::par::{self, Parallelism};

pub const RUNS_FILE: &str = "runs.csv";
pub const TABLE_FILE: &str = "collisions.csv";
pub const CURVES_FILE: &str = "curves.svg";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub models: Vec<ActionSpaceModel>,
    pub seeds: Vec<u64>,
    /// Reward variants to run; `true` penalizes collisions.
    pub penalize: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub model: ActionSpaceModel,
    pub seed: u64,
    pub penalize: bool,
    pub run_dir: PathBuf,
    /// Summary of a finished run, or the error that stopped it.
    pub result: std::result::Result<RunSummary, String>,
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub model: String,
    pub seed: u64,
    pub penalize_collision: bool,
    pub status: String,
    pub episodes: Option<usize>,
    pub successes: Option<usize>,
    pub collisions: Option<u64>,
    pub final_success_rate: Option<f64>,
    pub error: Option<String>,
}

/// Mean collisions per run with and without the collision penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model: String,
    pub penalized: Option<f64>,
    pub non_penalized: Option<f64>,
    pub percent_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub runs: Vec<RunOutcome>,
    pub table: Vec<TableRow>,
}

/// Percent change in collisions when the penalty is removed, relative to
/// the penalized count. Negative values mean more collisions without it.
pub fn percent_difference(penalized: f64, non_penalized: f64) -> Option<f64> {
    (penalized > 0.0).then(|| (penalized - non_penalized) / penalized * 100.0)
}

pub fn run_dir_name(model: ActionSpaceModel, seed: u64, penalize: bool) -> String {
    format!(
        "{model}-seed{seed}-{}",
        if penalize { "pen" } else { "nopen" }
    )
}

/// Trains every (model, reward variant, seed) combination under `out`.
/// A failing run is recorded and does not stop the others.
pub fn sweep(
    base: &RunConfig,
    spec: &SweepSpec,
    out: &Path,
    mode: Parallelism,
) -> Result<SweepReport> {
    if spec.models.is_empty() {
        log::warn!("sweep has no models, nothing to do");
        return Ok(SweepReport {
            runs: Vec::new(),
            table: Vec::new(),
        });
    }
    base.validate()?;
    std::fs::create_dir_all(out)?;
    let mut jobs = Vec::new();
    for &model in &spec.models {
        for &penalize in &spec.penalize {
            for &seed in &spec.seeds {
                let mut cfg = base.clone();
                cfg.env.control.model = model;
                cfg.env.reward.penalize_collision = penalize;
                cfg.seed = seed;
                jobs.push((cfg, out.join(run_dir_name(model, seed, penalize))));
            }
        }
    }
    let runs = par::map(mode, jobs, |(cfg, dir)| {
        let result = train(&cfg, &dir).map(|o| o.summary).map_err(|e| {
            log::error!("run {} failed: {e}", dir.display());
            e.to_string()
        });
        RunOutcome {
            model: cfg.env.control.model,
            seed: cfg.seed,
            penalize: cfg.env.reward.penalize_collision,
            run_dir: dir,
            result,
        }
    });
    let table = collision_table(&spec.models, &runs);
    write_runs(&out.join(RUNS_FILE), &runs)?;
    write_csv(&out.join(TABLE_FILE), &table)?;
    let finished: Vec<&PathBuf> = runs
        .iter()
        .filter(|r| r.result.is_ok())
        .map(|r| &r.run_dir)
        .collect();
    if !finished.is_empty() {
        let (_, svg) = plot_runs(&finished, "episode reward")?;
        std::fs::write(out.join(CURVES_FILE), svg)?;
    }
    Ok(SweepReport { runs, table })
}

/// Aggregates finished runs into one row per model. Failed runs are left
/// out of the means.
pub fn collision_table(models: &[ActionSpaceModel], runs: &[RunOutcome]) -> Vec<TableRow> {
    let mean = |model, penalize| {
        let xs: Vec<f64> = runs
            .iter()
            .filter(|r| r.model == model && r.penalize == penalize)
            .filter_map(|r| r.result.as_ref().ok())
            .map(|s| s.collisions as f64)
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    models
        .iter()
        .map(|&m| {
            let (pen, nopen) = (mean(m, true), mean(m, false));
            TableRow {
                model: m.to_string(),
                penalized: pen,
                non_penalized: nopen,
                percent_difference: pen.zip(nopen).and_then(|(p, n)| percent_difference(p, n)),
            }
        })
        .collect()
}

fn write_runs(path: &Path, runs: &[RunOutcome]) -> Result<()> {
    let rows: Vec<RunRow> = runs
        .iter()
        .map(|r| {
            let ok = r.result.as_ref().ok();
            RunRow {
                model: r.model.to_string(),
                seed: r.seed,
                penalize_collision: r.penalize,
                status: if ok.is_some() { "ok" } else { "failed" }.into(),
                episodes: ok.map(|s| s.episodes),
                successes: ok.map(|s| s.successes),
                collisions: ok.map(|s| s.collisions),
                final_success_rate: ok.map(|s| s.final_success_rate),
                error: r.result.as_ref().err().cloned(),
            }
        })
        .collect();
    write_csv(path, &rows)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
