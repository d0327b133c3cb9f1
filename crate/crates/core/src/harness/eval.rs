//! Deterministic evaluation of a trained policy.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::train::{CHECKPOINT_DIR, CONFIG_FILE, FINAL_CHECKPOINT};
use crate::error::{Error, Result};
use crate::rl::{Checkpoint, Sac};
use crate::tasks::{PegInsertionEnv, Termination};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: usize,
    pub successes: usize,
    pub collisions: usize,
    pub success_rate: f64,
    /// Mean episode length over successful episodes.
    pub mean_steps_to_success: Option<f64>,
    pub mean_reward: Option<f64>,
}

/// Runs `episodes` episodes with the mean action of the policy. Refuses a
/// checkpoint whose configuration hash differs from the environment's.
pub fn evaluate(
    cfg: &RunConfig,
    ckpt: Checkpoint,
    episodes: usize,
    seed: u64,
) -> Result<EvalReport> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    if ckpt.config_hash != hash {
        return Err(Error::ConfigHashMismatch {
            checkpoint: ckpt.config_hash,
            environment: hash,
        });
    }
    let mut agent = Sac::from_checkpoint(ckpt, cfg.sac.clone(), seed)?;
    let mut env = PegInsertionEnv::new(cfg.env.clone(), seed)?;
    let (mut successes, mut collisions) = (0, 0);
    let (mut success_steps, mut reward_sum) = (0usize, 0.0);
    for _ in 0..episodes {
        let mut obs = env.reset();
        let rec = loop {
            let res = env.step(&agent.act(&obs, true))?;
            if let Some(rec) = env.record() {
                break rec;
            }
            obs = res.obs;
        };
        reward_sum += rec.reward;
        match rec.termination {
            Termination::Success => {
                successes += 1;
                success_steps += rec.steps;
            }
            Termination::Collision => collisions += 1,
            Termination::Timeout => {}
        }
    }
    Ok(EvalReport {
        episodes,
        successes,
        collisions,
        success_rate: if episodes == 0 {
            0.0
        } else {
            successes as f64 / episodes as f64
        },
        mean_steps_to_success: (successes > 0).then(|| success_steps as f64 / successes as f64),
        mean_reward: (episodes > 0).then(|| reward_sum / episodes as f64),
    })
}

/// Evaluates the final checkpoint of a run directory against the
/// configuration stored beside it.
pub fn evaluate_run_dir(run_dir: &Path, episodes: usize, seed: u64) -> Result<EvalReport> {
    let cfg = RunConfig::load(&run_dir.join(CONFIG_FILE))?;
    let ckpt = Checkpoint::load(&run_dir.join(CHECKPOINT_DIR).join(FINAL_CHECKPOINT))?;
    evaluate(&cfg, ckpt, episodes, seed)
}
