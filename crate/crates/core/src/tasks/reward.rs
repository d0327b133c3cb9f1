//! Shaped reward: weighted distance, action and force terms mapped
//! linearly from `[0, 1]` onto `[1, 0]`, a constant per-step penalty, and
//! a terminal bonus or penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec6;

/// Bonus for completing the task.
pub const KAPPA_SUCCESS: f64 = 200.0;
/// Penalty for a safety violation.
pub const KAPPA_COLLISION: f64 = -10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Success,
    Timeout,
    Collision,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Success => "success",
            Self::Timeout => "timeout",
            Self::Collision => "collision",
        }
    }

    /// Whether the state is terminal for bootstrapping; a timeout only
    /// truncates the episode.
    pub fn is_terminal(self) -> bool {
        !matches!(self, Self::Timeout)
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Termination {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Self::Success),
            "timeout" => Ok(Self::Timeout),
            "collision" => Ok(Self::Collision),
            _ => Err(Error::Config(format!("unknown termination cause {s:?}"))),
        }
    }
}

/// A normalization scale given either as one scalar or per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scale {
    Scalar(f64),
    PerAxis([f64; 6]),
}

impl Scale {
    pub fn per_axis(&self) -> Vec6 {
        match self {
            Self::Scalar(s) => Vec6::repeat(*s),
            Self::PerAxis(a) => Vec6::from_column_slice(a),
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.per_axis().iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!("reward.{what} must be positive")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    /// `w1..w5`: distance, action, force, step penalty, terminal term.
    pub weights: [f64; 5],
    /// Pose error normalization (m for position axes, rad for rotation).
    pub x_max: Scale,
    /// Action normalization; actions already live in `[-1, 1]`.
    pub a_max: f64,
    /// Force normalization (N, N m).
    pub f_max: Scale,
    /// Per-step penalty.
    pub rho: f64,
    /// Smoothing constant of the L1,2 norm.
    pub l12_c: f64,
    /// Apply the collision penalty; without it a collision ends the
    /// episode with no terminal term.
    pub penalize_collision: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            weights: [1.0, 0.1, 0.3, 1.0, 1.0],
            x_max: Scale::PerAxis([0.03, 0.03, 0.03, 0.5, 0.5, 0.5]),
            a_max: 1.0,
            f_max: Scale::PerAxis([20.0, 20.0, 20.0, 2.0, 2.0, 2.0]),
            rho: -0.01,
            l12_c: 1e-4,
            penalize_collision: true,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !w.is_finite()) || !self.rho.is_finite() {
            return Err(Error::Config(
                "reward weights and rho must be finite".into(),
            ));
        }
        self.x_max.validate("x_max")?;
        self.f_max.validate("f_max")?;
        if !(self.a_max > 0.0) || !(self.l12_c > 0.0) {
            return Err(Error::Config(
                "reward.a_max and reward.l12_c must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Terminal term for the given episode outcome.
    pub fn kappa(&self, terminal: Option<Termination>) -> f64 {
        match terminal {
            Some(Termination::Success) => KAPPA_SUCCESS,
            Some(Termination::Collision) if self.penalize_collision => KAPPA_COLLISION,
            _ => 0.0,
        }
    }
}

/// `1 - clamp(y, 0, 1)`.
pub fn linear_map(y: f64) -> f64 {
    1.0 - y.clamp(0.0, 1.0)
}

/// `0.5 |v|^2 + sqrt(c + |v|^2)`.
pub fn l12_norm(v: &[f64], c: f64) -> f64 {
    let sq: f64 = v.iter().map(|x| x * x).sum();
    0.5 * sq + (c + sq).sqrt()
}

/// The L1,2 norm shifted and scaled so that `|v| = 0` gives 0 and
/// `|v| = 1` gives 1.
pub fn l12_normalized(v: &[f64], c: f64) -> f64 {
    (l12_norm(v, c) - c.sqrt()) / (0.5 + (1.0 + c).sqrt() - c.sqrt())
}

/// Weighted shaped reward for one policy step.
///
/// The pose error and force are divided elementwise by their maxima. The
/// action term uses the root-mean-square of `a / a_max` so its scale does
/// not depend on the action dimension.
pub fn compute_reward(
    cfg: &RewardConfig,
    x_e: &Vec6,
    a: &[f64],
    f_ext: &Vec6,
    terminal: Option<Termination>,
) -> f64 {
    let [w1, w2, w3, w4, w5] = cfg.weights;
    let xn = x_e.component_div(&cfg.x_max.per_axis());
    let y_x = l12_normalized(xn.as_slice(), cfg.l12_c);
    let y_a = if a.is_empty() {
        0.0
    } else {
        (a.iter().map(|v| (v / cfg.a_max).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
    };
    let y_f = f_ext.component_div(&cfg.f_max.per_axis()).norm();
    w1 * linear_map(y_x)
        + w2 * linear_map(y_a)
        + w3 * linear_map(y_f)
        + w4 * cfg.rho
        + w5 * cfg.kappa(terminal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximal_shaping_reward() {
        let cfg = RewardConfig::default();
        let r = compute_reward(&cfg, &Vec6::zeros(), &[0.0; 14], &Vec6::zeros(), None);
        assert!((r - (1.0 + 0.1 + 0.3 - 0.01)).abs() < 1e-15);
    }

    #[test]
    fn kappa_values() {
        let mut cfg = RewardConfig::default();
        assert_eq!(cfg.kappa(Some(Termination::Success)), 200.0);
        assert_eq!(cfg.kappa(Some(Termination::Collision)), -10.0);
        assert_eq!(cfg.kappa(Some(Termination::Timeout)), 0.0);
        assert_eq!(cfg.kappa(None), 0.0);
        cfg.penalize_collision = false;
        assert_eq!(cfg.kappa(Some(Termination::Collision)), 0.0);
        assert_eq!(cfg.kappa(Some(Termination::Success)), 200.0);
    }

    #[test]
    fn terminal_terms_add() {
        let cfg = RewardConfig::default();
        let base = compute_reward(&cfg, &Vec6::zeros(), &[], &Vec6::zeros(), None);
        let s = compute_reward(
            &cfg,
            &Vec6::zeros(),
            &[],
            &Vec6::zeros(),
            Some(Termination::Success),
        );
        let c = compute_reward(
            &cfg,
            &Vec6::zeros(),
            &[],
            &Vec6::zeros(),
            Some(Termination::Collision),
        );
        assert!((s - base - 200.0).abs() < 1e-12);
        assert!((c - base + 10.0).abs() < 1e-12);
    }

    #[test]
    fn distance_term_clamps_beyond_max() {
        let cfg = RewardConfig::default();
        let far = Vec6::new(0.03, 0.0, 0.0, 0.0, 0.0, 0.0);
        let farther = Vec6::new(0.3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let r1 = compute_reward(&cfg, &far, &[], &Vec6::zeros(), None);
        let r2 = compute_reward(&cfg, &farther, &[], &Vec6::zeros(), None);
        assert!((r1 - (0.1 + 0.3 - 0.01)).abs() < 1e-12);
        assert_eq!(r1, r2);
    }

    #[test]
    fn normalized_l12_endpoints() {
        assert!(l12_normalized(&[0.0, 0.0], 1e-4).abs() < 1e-15);
        assert!((l12_normalized(&[0.6, 0.8], 1e-4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_parses_scalar_or_axes() {
        #[derive(Deserialize)]
        struct W {
            s: Scale,
        }
        let a: W = toml::from_str("s = 0.5").unwrap();
        assert_eq!(a.s.per_axis(), Vec6::repeat(0.5));
        let b: W = toml::from_str("s = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]").unwrap();
        assert_eq!(b.s.per_axis()[5], 6.0);
    }
}
