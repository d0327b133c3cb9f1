//! Fail-safe gate applied to every streamed pose command: the command is
//! executed only if an IK solution exists and the joint velocity needed to
//! reach it within one period is under the limit; a contact force above
//! the limit on any axis aborts the episode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Pose, Wrench};
use crate::sim::Kinematics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyLimits {
    /// Per-joint velocity limit (rad/s or m/s).
    pub qdot_max: Vec<f64>,
    /// Force limit per axis (N).
    pub f_max: f64,
    /// Torque limit per axis (N m).
    pub torque_max: f64,
}

impl SafetyLimits {
    pub fn validate(&self, dof: usize) -> Result<()> {
        if self.qdot_max.len() != dof {
            return Err(Error::Config(format!(
                "safety.qdot_max has {} entries, robot has {dof} joints",
                self.qdot_max.len()
            )));
        }
        if self.qdot_max.iter().any(|v| !(*v > 0.0))
            || !(self.f_max > 0.0)
            || !(self.torque_max > 0.0)
        {
            return Err(Error::Config(
                "safety limits must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateVerdict {
    /// Validated joint command.
    Execute(Vec<f64>),
    HoldNoIk,
    HoldVelocity,
    AbortForce,
}

impl GateVerdict {
    pub fn is_hold(&self) -> bool {
        matches!(self, Self::HoldNoIk | Self::HoldVelocity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SafetyStats {
    pub holds_no_ik: u64,
    pub holds_velocity: u64,
    /// Episodes aborted by the force limit.
    pub collisions: u64,
}

impl SafetyStats {
    pub fn record(&mut self, verdict: &GateVerdict) {
        match verdict {
            GateVerdict::HoldNoIk => self.holds_no_ik += 1,
            GateVerdict::HoldVelocity => self.holds_velocity += 1,
            GateVerdict::AbortForce => self.collisions += 1,
            GateVerdict::Execute(_) => {}
        }
    }
}

/// True iff any force axis exceeds `f_max` or any torque axis exceeds
/// `torque_max` in magnitude (strict inequality).
pub fn is_collision(limits: &SafetyLimits, f_ext: &Wrench) -> bool {
    f_ext
        .force
        .iter()
        .any(|f| f.abs() > limits.f_max || f.is_nan())
        || f_ext
            .torque
            .iter()
            .any(|t| t.abs() > limits.torque_max || t.is_nan())
}

/// Validates one pose command `x_c` against the robot at `q_t`.
///
/// The checks run in order IK, joint velocity, contact force. A force
/// violation always aborts, even when a proactive check already failed:
/// a held robot would otherwise stay in violation without ending the
/// episode.
pub fn gate(
    limits: &SafetyLimits,
    robot: &impl Kinematics,
    q_t: &[f64],
    x_c: &Pose,
    f_ext: &Wrench,
    dt: f64,
) -> GateVerdict {
    let q_c = robot.ik(x_c, q_t);
    let too_fast = q_c.as_ref().is_some_and(|q_c| {
        q_c.iter()
            .zip(q_t)
            .zip(&limits.qdot_max)
            .any(|((c, t), max)| ((t - c) / dt).abs() > *max)
    });
    if is_collision(limits, f_ext) {
        return GateVerdict::AbortForce;
    }
    match q_c {
        None => GateVerdict::HoldNoIk,
        Some(_) if too_fast => GateVerdict::HoldVelocity,
        Some(q_c) => GateVerdict::Execute(q_c),
    }
}
