//! Squashed diagonal Gaussian policy head.
//!
//! The policy network outputs `[mean; raw_log_std]` for each action
//! dimension. The log standard deviation is squashed smoothly into
//! `[LOG_STD_MIN, LOG_STD_MAX]`, a pre-squash sample `u = mean + std * eps`
//! is drawn and the action is `tanh(u)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::Mlp;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Actions are kept strictly inside `(-1, 1)` even where `tanh` rounds to one.
const ACTION_BOUND: f64 = 1.0 - f64::EPSILON;

fn squash(u: f64) -> f64 {
    u.tanh().clamp(-ACTION_BOUND, ACTION_BOUND)
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

pub fn squash_log_std(raw: f64) -> f64 {
    LOG_STD_MIN + 0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (raw.tanh() + 1.0)
}

/// d squash_log_std / d raw.
pub fn squash_log_std_grad(raw: f64) -> f64 {
    let t = raw.tanh();
    0.5 * (LOG_STD_MAX - LOG_STD_MIN) * (1.0 - t * t)
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 - tanh(u)^2)` without cancellation for large `|u|`.
pub fn log1m_tanh2(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Log-density of `tanh(u)` where `u ~ N(mean, exp(log_std)^2)`, per
/// dimension, given `eps = (u - mean) / std`.
pub fn log_prob_term(u: f64, eps: f64, log_std: f64) -> f64 {
    -0.5 * eps * eps - log_std - HALF_LN_2PI - log1m_tanh2(u)
}

/// One batch of reparameterized samples with everything backpropagation
/// needs. Matrices are `dims x batch`.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub actions: DMatrix<f64>,
    pub log_probs: DVector<f64>,
    pub pre_squash: DMatrix<f64>,
    pub raw_log_std: DMatrix<f64>,
    pub log_std: DMatrix<f64>,
    pub eps: DMatrix<f64>,
}

pub fn standard_normal(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Applies the policy head to raw network output `out` (`2 dims x batch`)
/// with the given noise.
pub fn sample_from_output(out: &DMatrix<f64>, eps: &DMatrix<f64>) -> PolicySample {
    let dims = out.nrows() / 2;
    assert_eq!(eps.shape(), (dims, out.ncols()), "noise has wrong shape");
    let mean = out.rows(0, dims);
    let raw_log_std = out.rows(dims, dims).into_owned();
    let log_std = raw_log_std.map(squash_log_std);
    let pre_squash = DMatrix::from_fn(dims, out.ncols(), |i, j| {
        mean[(i, j)] + log_std[(i, j)].exp() * eps[(i, j)]
    });
    let actions = pre_squash.map(squash);
    let log_probs = DVector::from_fn(out.ncols(), |j, _| {
        (0..dims)
            .map(|i| log_prob_term(pre_squash[(i, j)], eps[(i, j)], log_std[(i, j)]))
            .sum()
    });
    PolicySample {
        actions,
        log_probs,
        pre_squash,
        raw_log_std,
        log_std,
        eps: eps.clone(),
    }
}

pub fn sample(policy: &Mlp, obs: &DMatrix<f64>, eps: &DMatrix<f64>) -> PolicySample {
    sample_from_output(&policy.forward(obs), eps)
}

/// Deterministic action `tanh(mean)`.
pub fn mean_action(policy: &Mlp, obs: &DMatrix<f64>) -> DMatrix<f64> {
    let out = policy.forward(obs);
    out.rows(0, out.nrows() / 2).map(squash)
}
