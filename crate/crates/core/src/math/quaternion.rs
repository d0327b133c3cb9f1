use serde::{Deserialize, Serialize};

use super::{Vec3, UNIT_TOLERANCE};
use crate::error::{Error, Result};

/// Unit quaternion (Euler parameters) with scalar part `eta` and vector
/// part `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub eta: f64,
    pub eps: Vec3,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::identity()
    }
}

impl Quaternion {
    pub const fn identity() -> Self {
        Self {
            eta: 1.0,
            eps: Vec3::new(0.0, 0.0, 0.0),
        }
    }

    pub fn new(eta: f64, eps: Vec3) -> Self {
        Self { eta, eps }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 || angle == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, axis * (s / n)).canonical()
    }

    /// Exponential map of a rotation vector (axis * angle).
    pub fn from_rotation_vector(rv: &Vec3) -> Self {
        let angle = rv.norm();
        if angle < 1e-12 {
            // second-order expansion keeps the map smooth at the origin
            return Self::new(1.0, rv * 0.5).normalized();
        }
        Self::from_axis_angle(rv, angle)
    }

    /// Logarithm map: rotation vector with angle in `[0, pi]`.
    pub fn to_rotation_vector(&self) -> Vec3 {
        let q = self.canonical();
        let s = q.eps.norm();
        if s < 1e-12 {
            return q.eps * 2.0;
        }
        q.eps * (2.0 * s.atan2(q.eta) / s)
    }

    pub fn norm(&self) -> f64 {
        (self.eta * self.eta + self.eps.norm_squared()).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self::new(self.eta / n, self.eps / n)
    }

    /// Representative with non-negative scalar part.
    pub fn canonical(&self) -> Self {
        if self.eta < 0.0 {
            Self::new(-self.eta, -self.eps)
        } else {
            *self
        }
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.eta, -self.eps)
    }

    /// Hamilton product `self * rhs`.
    pub fn mul(&self, rhs: &Quaternion) -> Quaternion {
        Quaternion::new(
            self.eta * rhs.eta - self.eps.dot(&rhs.eps),
            rhs.eps * self.eta + self.eps * rhs.eta + self.eps.cross(&rhs.eps),
        )
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        // v' = v + 2 eta (eps x v) + 2 eps x (eps x v)
        let t = self.eps.cross(v) * 2.0;
        v + t * self.eta + self.eps.cross(&t)
    }

    pub fn to_rotation_matrix(&self) -> nalgebra::Matrix3<f64> {
        let (w, x, y, z) = (self.eta, self.eps.x, self.eps.y, self.eps.z);
        nalgebra::Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Applies a world-frame rotation increment `omega * dt` on the left.
    pub fn integrate(&self, omega: &Vec3, dt: f64) -> Quaternion {
        Quaternion::from_rotation_vector(&(omega * dt))
            .mul(self)
            .normalized()
            .canonical()
    }

    /// Angle in radians of the rotation taking `self` onto `other`.
    pub fn angle_to(&self, other: &Quaternion) -> f64 {
        other.mul(&self.conjugate()).to_rotation_vector().norm()
    }
}

/// Orientation error between a goal and a current unit quaternion,
/// expressed as a world-frame rotation vector (axis times angle in rad).
///
/// The vector part follows the unit-quaternion controller convention
/// `e = eta_c eps_g - eta_g eps_c - eps_g x eps_c`, i.e. the vector part of
/// `q_g * conj(q_c)`; it is then rescaled from `sin(theta/2)` to `theta`.
pub fn orientation_error(goal: &Quaternion, current: &Quaternion) -> Result<Vec3> {
    if !goal.is_unit() || !current.is_unit() {
        return Err(Error::NonUnitQuaternion(if goal.is_unit() {
            current.norm()
        } else {
            goal.norm()
        }));
    }
    let e = goal.eps * current.eta - current.eps * goal.eta - goal.eps.cross(&current.eps);
    let mut scalar = goal.eta * current.eta + goal.eps.dot(&current.eps);
    let mut e = e;
    if scalar < 0.0 {
        scalar = -scalar;
        e = -e;
    }
    let s = e.norm();
    if s == 0.0 {
        return Ok(e);
    }
    Ok(e * (2.0 * s.atan2(scalar) / s))
}
