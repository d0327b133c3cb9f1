use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::metrics::{recent_success_rate, write_metrics, MetricsRow};
use crate::error::{Error, Result};
use crate::rl::{ReplayBuffer, Sac, Transition};
use crate::safety::SafetyStats;
use crate::tasks::{PegInsertionEnv, Termination};

/// Seeds of the independent random streams of one run.
fn stream_seed(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub model: String,
    pub seed: u64,
    pub penalize_collision: bool,
    pub steps: usize,
    pub episodes: usize,
    pub successes: usize,
    pub collisions: u64,
    pub holds_no_ik: u64,
    pub holds_velocity: u64,
    /// Success fraction of the final 20 episodes.
    pub final_success_rate: f64,
    pub early_stopped: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub run_dir: PathBuf,
    pub rows: Vec<MetricsRow>,
    pub summary: RunSummary,
    pub agent: Sac,
}

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.toml";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";

/// Runs one seeded training session and writes the run directory:
/// resolved configuration, metrics CSV, checkpoints and a summary.
pub fn train(cfg: &RunConfig, run_dir: &Path) -> Result<TrainOutcome> {
    cfg.validate()?;
    let ckpt_dir = run_dir.join(CHECKPOINT_DIR);
    std::fs::create_dir_all(&ckpt_dir)?;
    std::fs::write(run_dir.join(CONFIG_FILE), cfg.to_toml_string()?)?;
    let hash = cfg.config_hash();

    let mut env = PegInsertionEnv::new(cfg.env.clone(), stream_seed(cfg.seed, 1))?;
    let mut agent = Sac::new(
        env.obs_dim(),
        env.action_dim(),
        cfg.sac.clone(),
        stream_seed(cfg.seed, 2),
    )?;
    let mut buffer = ReplayBuffer::new(cfg.sac.buffer_capacity)?;
    let mut explore = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, 3));

    let mut rows = Vec::new();
    let mut obs = env.reset();
    let mut early_stopped = false;
    let mut step = 0;
    while step < cfg.total_steps {
        step += 1;
        let action: Vec<f64> = if step <= cfg.sac.warmup_steps {
            (0..env.action_dim())
                .map(|_| explore.random_range(-1.0..=1.0))
                .collect()
        } else {
            agent.act(&obs, false)
        };
        let res = env.step(&action)?;
        buffer.store(Transition {
            obs: std::mem::take(&mut obs),
            action,
            reward: res.reward,
            next_obs: res.obs.clone(),
            done: res.done,
        })?;
        if step > cfg.sac.warmup_steps && buffer.len() >= cfg.sac.batch_size {
            for _ in 0..cfg.sac.updates_per_step {
                match agent.train_step(&buffer) {
                    Ok(rep) if step % 1000 == 0 => log::debug!("step {step}: {rep:?}"),
                    Ok(_) => {}
                    Err(e) => {
                        write_metrics(&run_dir.join(METRICS_FILE), &rows)?;
                        agent
                            .to_checkpoint(&hash)
                            .save(&ckpt_dir.join("diverged.ckpt"))?;
                        return Err(match e {
                            Error::Diverged(d) => Error::Diverged(format!("at step {step}: {d}")),
                            other => other,
                        });
                    }
                }
            }
        }
        let episode_over = res.done || res.truncated;
        if episode_over || step == cfg.total_steps {
            // an episode cut by the step budget is logged as a timeout
            let (reward, steps, termination) = match env.record() {
                Some(r) => (r.reward, r.steps, r.termination),
                None => (env.episode_reward(), env.steps(), Termination::Timeout),
            };
            let stats = env.stats();
            rows.push(MetricsRow {
                episode: rows.len(),
                global_step: step,
                reward,
                steps,
                termination,
                collisions: stats.collisions,
                holds_no_ik: stats.holds_no_ik,
                holds_velocity: stats.holds_velocity,
            });
            obs = env.reset();
            if let Some(es) = &cfg.train.early_stop {
                if rows.len() >= es.window
                    && recent_success_rate(&rows, es.window) >= es.success_rate
                {
                    early_stopped = true;
                    break;
                }
            }
        } else {
            obs = res.obs;
        }
        if cfg.train.checkpoint_every > 0 && step % cfg.train.checkpoint_every == 0 {
            agent
                .to_checkpoint(&hash)
                .save(&ckpt_dir.join(format!("step-{step:08}.ckpt")))?;
        }
    }
    agent
        .to_checkpoint(&hash)
        .save(&ckpt_dir.join(FINAL_CHECKPOINT))?;
    write_metrics(&run_dir.join(METRICS_FILE), &rows)?;
    let summary = summarize(cfg, &hash, &rows, env.stats(), early_stopped);
    std::fs::write(run_dir.join(SUMMARY_FILE), toml::to_string(&summary)?)?;
    Ok(TrainOutcome {
        run_dir: run_dir.to_path_buf(),
        rows,
        summary,
        agent,
    })
}

fn summarize(
    cfg: &RunConfig,
    hash: &str,
    rows: &[MetricsRow],
    stats: &SafetyStats,
    early_stopped: bool,
) -> RunSummary {
    RunSummary {
        config_hash: hash.to_string(),
        model: cfg.env.control.model.to_string(),
        seed: cfg.seed,
        penalize_collision: cfg.env.reward.penalize_collision,
        steps: rows.last().map_or(0, |r| r.global_step),
        episodes: rows.len(),
        successes: rows
            .iter()
            .filter(|r| r.termination == Termination::Success)
            .count(),
        collisions: stats.collisions,
        holds_no_ik: stats.holds_no_ik,
        holds_velocity: stats.holds_velocity,
        final_success_rate: recent_success_rate(rows, 20),
        early_stopped,
    }
}
