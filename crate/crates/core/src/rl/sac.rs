use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::checkpoint::Checkpoint;
use super::losses::{critic_input, critic_loss, policy_loss, q_target, temperature_loss};
use super::policy::{mean_action, sample, standard_normal};
use super::replay::{Batch, ReplayBuffer};
use super::Mlp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub alpha_lr: f64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub initial_alpha: f64,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub buffer_capacity: usize,
    /// Uniform random actions before the policy takes over.
    pub warmup_steps: usize,
    pub updates_per_step: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.002,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            alpha_lr: 3e-4,
            batch_size: 64,
            hidden: vec![64, 64],
            initial_alpha: 0.1,
            target_entropy: None,
            buffer_capacity: 1_000_000,
            warmup_steps: 1000,
            updates_per_step: 1,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("sac.{m}")));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if [
            self.actor_lr,
            self.critic_lr,
            self.alpha_lr,
            self.initial_alpha,
        ]
        .iter()
        .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return bad("learning rates and initial_alpha must be positive");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("batch_size and buffer_capacity must be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden must list positive layer widths");
        }
        if self.target_entropy.is_some_and(|h| !h.is_finite()) {
            return bad("target_entropy must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateReport {
    pub critic_loss: f64,
    pub policy_loss: f64,
    pub alpha_loss: f64,
    pub alpha: f64,
    /// Batch estimate of the policy entropy, `-mean log pi`.
    pub entropy: f64,
}

/// Soft Actor-Critic agent with twin critics, target critics and automatic
/// temperature.
#[derive(Debug, Clone)]
pub struct Sac {
    cfg: SacConfig,
    obs_dim: usize,
    act_dim: usize,
    policy: Mlp,
    q1: Mlp,
    q2: Mlp,
    q1_target: Mlp,
    q2_target: Mlp,
    log_alpha: f64,
    policy_opt: Adam,
    q1_opt: Adam,
    q2_opt: Adam,
    alpha_opt: Adam,
    rng: ChaCha8Rng,
}

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl Sac {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: SacConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = Mlp::new(&layer_sizes(obs_dim, &cfg.hidden, 2 * act_dim), &mut rng)?;
        let q_sizes = layer_sizes(obs_dim + act_dim, &cfg.hidden, 1);
        let q1 = Mlp::new(&q_sizes, &mut rng)?;
        let q2 = Mlp::new(&q_sizes, &mut rng)?;
        let log_alpha = cfg.initial_alpha.ln();
        Ok(Self::assemble(
            cfg,
            obs_dim,
            act_dim,
            policy,
            q1.clone(),
            q2.clone(),
            q1,
            q2,
            log_alpha,
            rng,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        cfg: SacConfig,
        obs_dim: usize,
        act_dim: usize,
        policy: Mlp,
        q1: Mlp,
        q2: Mlp,
        q1_target: Mlp,
        q2_target: Mlp,
        log_alpha: f64,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            policy_opt: Adam::new(policy.num_params(), cfg.actor_lr),
            q1_opt: Adam::new(q1.num_params(), cfg.critic_lr),
            q2_opt: Adam::new(q2.num_params(), cfg.critic_lr),
            alpha_opt: Adam::new(1, cfg.alpha_lr),
            cfg,
            obs_dim,
            act_dim,
            policy,
            q1,
            q2,
            q1_target,
            q2_target,
            log_alpha,
            rng,
        }
    }

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn target_entropy(&self) -> f64 {
        self.cfg.target_entropy.unwrap_or(-(self.act_dim as f64))
    }

    pub fn policy(&self) -> &Mlp {
        &self.policy
    }

    pub fn critics(&self) -> (&Mlp, &Mlp) {
        (&self.q1, &self.q2)
    }

    pub fn target_critics(&self) -> (&Mlp, &Mlp) {
        (&self.q1_target, &self.q2_target)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Policy action for one observation; `tanh(mean)` when deterministic.
    pub fn act(&mut self, obs: &[f64], deterministic: bool) -> Vec<f64> {
        let x = DMatrix::from_column_slice(self.obs_dim, 1, obs);
        if deterministic {
            return mean_action(&self.policy, &x).as_slice().to_vec();
        }
        let eps = standard_normal(self.act_dim, 1, &mut self.rng);
        sample(&self.policy, &x, &eps).actions.as_slice().to_vec()
    }

    /// Samples a batch from `buffer` and performs one update.
    pub fn train_step(&mut self, buffer: &ReplayBuffer) -> Result<UpdateReport> {
        let batch = buffer.sample_batch(&mut self.rng, self.cfg.batch_size)?;
        self.update(&batch)
    }

    /// One gradient step on both critics, the policy and the temperature,
    /// followed by the soft target update.
    pub fn update(&mut self, batch: &Batch) -> Result<UpdateReport> {
        let n = batch.len();
        let alpha = self.alpha();

        let eps_next = standard_normal(self.act_dim, n, &mut self.rng);
        let next = sample(&self.policy, &batch.next_obs, &eps_next);
        let x_next = critic_input(&batch.next_obs, &next.actions);
        let y = q_target(
            &batch.rewards,
            &batch.dones,
            &self.q1_target.forward(&x_next),
            &self.q2_target.forward(&x_next),
            &next.log_probs,
            alpha,
            self.cfg.gamma,
        );
        let l1 = critic_loss(&self.q1, &batch.obs, &batch.actions, &y);
        let l2 = critic_loss(&self.q2, &batch.obs, &batch.actions, &y);
        self.q1_opt.step(self.q1.params_mut(), &l1.grad);
        self.q2_opt.step(self.q2.params_mut(), &l2.grad);

        let eps = standard_normal(self.act_dim, n, &mut self.rng);
        let pl = policy_loss(&self.policy, &self.q1, &self.q2, &batch.obs, &eps, alpha);
        self.policy_opt.step(self.policy.params_mut(), &pl.grad);

        let (alpha_loss, alpha_grad) =
            temperature_loss(self.log_alpha, &pl.sample.log_probs, self.target_entropy());
        let mut la = [self.log_alpha];
        self.alpha_opt.step(&mut la, &[alpha_grad]);
        self.log_alpha = la[0];

        self.q1_target.soft_update_from(&self.q1, self.cfg.tau)?;
        self.q2_target.soft_update_from(&self.q2, self.cfg.tau)?;

        let report = UpdateReport {
            critic_loss: l1.loss + l2.loss,
            policy_loss: pl.loss,
            alpha_loss,
            alpha: self.alpha(),
            entropy: -pl.sample.log_probs.mean(),
        };
        let finite = [
            report.critic_loss,
            report.policy_loss,
            report.alpha_loss,
            report.alpha,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Diverged(format!("{report:?}")));
        }
        Ok(report)
    }

    pub fn to_checkpoint(&self, config_hash: &str) -> Checkpoint {
        Checkpoint {
            config_hash: config_hash.to_string(),
            log_alpha: self.log_alpha,
            policy: self.policy.clone(),
            q1: self.q1.clone(),
            q2: self.q2.clone(),
            q1_target: self.q1_target.clone(),
            q2_target: self.q2_target.clone(),
        }
    }

    /// Restores the networks and temperature; optimizer moments start fresh.
    pub fn from_checkpoint(ckpt: Checkpoint, cfg: SacConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let obs_dim = ckpt.policy.input_dim();
        let act_dim = ckpt.policy.output_dim() / 2;
        let q_sizes = layer_sizes(obs_dim + act_dim, &cfg.hidden, 1);
        let p_sizes = layer_sizes(obs_dim, &cfg.hidden, 2 * act_dim);
        if ckpt.policy.sizes() != p_sizes.as_slice()
            || [&ckpt.q1, &ckpt.q2, &ckpt.q1_target, &ckpt.q2_target]
                .iter()
                .any(|q| q.sizes() != q_sizes.as_slice())
        {
            return Err(Error::Checkpoint(
                "network shapes do not match the configuration".into(),
            ));
        }
        Ok(Self::assemble(
            cfg,
            obs_dim,
            act_dim,
            ckpt.policy,
            ckpt.q1,
            ckpt.q2,
            ckpt.q1_target,
            ckpt.q2_target,
            ckpt.log_alpha,
            ChaCha8Rng::seed_from_u64(seed),
        ))
    }
}
