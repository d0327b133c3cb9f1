//! The three SAC objectives with hand-derived gradients. Each function is
//! pure in its parameters so the gradients can be checked against finite
//! differences.

use nalgebra::{DMatrix, DVector};

use super::policy::{sample_from_output, squash_log_std_grad, PolicySample};
use super::Mlp;

#[derive(Debug, Clone)]
pub struct LossGrad {
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Stacks observations over actions, the critic's input layout.
pub fn critic_input(obs: &DMatrix<f64>, act: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(obs.ncols(), act.ncols());
    let mut x = DMatrix::zeros(obs.nrows() + act.nrows(), obs.ncols());
    x.rows_mut(0, obs.nrows()).copy_from(obs);
    x.rows_mut(obs.nrows(), act.nrows()).copy_from(act);
    x
}

/// Soft Bellman target `r + gamma (1 - done) (min Q'(s', a') - alpha log pi(a'|s'))`.
pub fn q_target(
    rewards: &DVector<f64>,
    dones: &DVector<f64>,
    next_q1: &DMatrix<f64>,
    next_q2: &DMatrix<f64>,
    next_log_probs: &DVector<f64>,
    alpha: f64,
    gamma: f64,
) -> DVector<f64> {
    DVector::from_fn(rewards.len(), |j, _| {
        let soft_v = next_q1[(0, j)].min(next_q2[(0, j)]) - alpha * next_log_probs[j];
        rewards[j] + gamma * (1.0 - dones[j]) * soft_v
    })
}

/// `0.5 mean_j (Q(s_j, a_j) - y_j)^2` and its gradient in the critic
/// parameters.
pub fn critic_loss(
    critic: &Mlp,
    obs: &DMatrix<f64>,
    act: &DMatrix<f64>,
    target: &DVector<f64>,
) -> LossGrad {
    let cache = critic.forward_cached(&critic_input(obs, act));
    let q = cache.output();
    let n = target.len() as f64;
    let diff = DMatrix::from_fn(1, target.len(), |_, j| q[(0, j)] - target[j]);
    let loss = 0.5 * diff.iter().map(|d| d * d).sum::<f64>() / n;
    let mut grad = vec![0.0; critic.num_params()];
    critic.backward(&cache, &(diff / n), Some(&mut grad));
    LossGrad { loss, grad }
}

#[derive(Debug, Clone)]
pub struct PolicyLoss {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub sample: PolicySample,
}

/// Reparameterized actor objective `mean_j (alpha log pi(a_j|s_j) - min_i Q_i(s_j, a_j))`
/// for fixed noise `eps`, and its gradient in the policy parameters.
pub fn policy_loss(
    policy: &Mlp,
    q1: &Mlp,
    q2: &Mlp,
    obs: &DMatrix<f64>,
    eps: &DMatrix<f64>,
    alpha: f64,
) -> PolicyLoss {
    let p_cache = policy.forward_cached(obs);
    let s = sample_from_output(p_cache.output(), eps);
    let dims = s.actions.nrows();
    let batch = obs.ncols();
    let n = batch as f64;

    let x = critic_input(obs, &s.actions);
    let c1 = q1.forward_cached(&x);
    let c2 = q2.forward_cached(&x);
    let (v1, v2) = (c1.output(), c2.output());
    let mut d1 = DMatrix::zeros(1, batch);
    let mut d2 = DMatrix::zeros(1, batch);
    let mut loss = 0.0;
    for j in 0..batch {
        let q_min = if v1[(0, j)] <= v2[(0, j)] {
            d1[(0, j)] = -1.0 / n;
            v1[(0, j)]
        } else {
            d2[(0, j)] = -1.0 / n;
            v2[(0, j)]
        };
        loss += (alpha * s.log_probs[j] - q_min) / n;
    }
    // dL/da through the critics
    let g1 = q1.backward(&c1, &d1, None);
    let g2 = q2.backward(&c2, &d2, None);
    let obs_dim = obs.nrows();
    let d_act = g1.rows(obs_dim, dims) + g2.rows(obs_dim, dims);

    let mut d_out = DMatrix::zeros(2 * dims, batch);
    for j in 0..batch {
        for i in 0..dims {
            let a = s.actions[(i, j)];
            let t = s.pre_squash[(i, j)].tanh();
            let sigma_eps = s.log_std[(i, j)].exp() * s.eps[(i, j)];
            let dq_du = d_act[(i, j)] * (1.0 - a * a);
            let dlogp_du = 2.0 * t;
            let d_mean = alpha * dlogp_du / n + dq_du;
            let d_log_std = alpha * (-1.0 + dlogp_du * sigma_eps) / n + dq_du * sigma_eps;
            d_out[(i, j)] = d_mean;
            d_out[(dims + i, j)] = d_log_std * squash_log_std_grad(s.raw_log_std[(i, j)]);
        }
    }
    let mut grad = vec![0.0; policy.num_params()];
    policy.backward(&p_cache, &d_out, Some(&mut grad));
    PolicyLoss {
        loss,
        grad,
        sample: s,
    }
}

/// Temperature objective `-mean_j log_alpha (log pi_j + target_entropy)` and
/// its derivative in `log_alpha`.
pub fn temperature_loss(
    log_alpha: f64,
    log_probs: &DVector<f64>,
    target_entropy: f64,
) -> (f64, f64) {
    let m = log_probs.iter().map(|lp| lp + target_entropy).sum::<f64>() / log_probs.len() as f64;
    (-log_alpha * m, -m)
}
