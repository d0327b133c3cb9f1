use serde::{Deserialize, Serialize};

use super::{join6, orientation_error, split6, Quaternion, Vec3, Vec6};
use crate::error::{Error, Result};

/// Task-space pose: position in metres plus unit-quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Pose {
    pub p: Vec3,
    pub phi: Quaternion,
}

impl Pose {
    pub fn new(p: Vec3, phi: Quaternion) -> Self {
        Self { p, phi }
    }

    pub fn from_position(p: Vec3) -> Self {
        Self::new(p, Quaternion::identity())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_unit() {
            return Err(Error::NonUnitQuaternion(self.phi.norm()));
        }
        if !self.p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pose position"));
        }
        Ok(())
    }

    /// Composition `self * rhs` of rigid transforms.
    pub fn compose(&self, rhs: &Pose) -> Pose {
        Pose::new(self.p + self.phi.rotate(&rhs.p), self.phi.mul(&rhs.phi))
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.phi.conjugate();
        Pose::new(-inv.rotate(&self.p), inv)
    }

    /// Moves the pose by a world-frame twist-like increment `v * dt`.
    pub fn integrate(&self, v: &Vec6, dt: f64) -> Pose {
        let (lin, ang) = split6(v);
        Pose::new(self.p + lin * dt, self.phi.integrate(&ang, dt))
    }

    pub fn transform_point(&self, v: &Vec3) -> Vec3 {
        self.p + self.phi.rotate(v)
    }
}

/// End-effector velocity: linear (m/s) and angular (rad/s), world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub linear: Vec3,
    pub angular: Vec3,
}

impl Twist {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_vec6(&self) -> Vec6 {
        join6(&self.linear, &self.angular)
    }

    pub fn from_vec6(v: &Vec6) -> Self {
        let (linear, angular) = split6(v);
        Self { linear, angular }
    }

    /// Finite-difference twist between two poses `dt` apart.
    pub fn between(from: &Pose, to: &Pose, dt: f64) -> Self {
        if dt <= 0.0 {
            return Self::zero();
        }
        let rot = to.phi.mul(&from.phi.conjugate()).to_rotation_vector();
        Self {
            linear: (to.p - from.p) / dt,
            angular: rot / dt,
        }
    }
}

/// Contact force (N) and torque (N m).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
}

impl Wrench {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_vec6(&self) -> Vec6 {
        join6(&self.force, &self.torque)
    }

    pub fn from_vec6(v: &Vec6) -> Self {
        let (force, torque) = split6(v);
        Self { force, torque }
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench {
            force: self.force + rhs.force,
            torque: self.torque + rhs.torque,
        }
    }
}

/// `x_e = x_g - x`: position difference followed by the orientation error.
pub fn pose_error(goal: &Pose, current: &Pose) -> Result<Vec6> {
    let rot = orientation_error(&goal.phi, &current.phi)?;
    Ok(join6(&(goal.p - current.p), &rot))
}
