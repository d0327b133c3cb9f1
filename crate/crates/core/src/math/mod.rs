//! Pose algebra, unit-quaternion orientation error, signal filtering and
//! bounded affine maps shared by the controllers, the simulator and the
//! reward.

mod filter;
mod pose;
mod quaternion;

pub use filter::LowPassFilter;
pub use pose::{pose_error, Pose, Twist, Wrench};
pub use quaternion::{orientation_error, Quaternion};

use nalgebra::{Vector3, Vector6};

pub type Vec3 = Vector3<f64>;
pub type Vec6 = Vector6<f64>;

/// Largest accepted deviation of a quaternion norm from one.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Maps `a` (clamped to `[-1, 1]`) affinely onto `[base - range, base + range]`.
#[inline]
pub fn map_range(a: f64, base: f64, range: f64) -> f64 {
    base + a.clamp(-1.0, 1.0) * range
}

pub fn vec6_from(a: &[f64; 6]) -> Vec6 {
    Vec6::from_column_slice(a)
}

pub fn vec6_to(v: &Vec6) -> [f64; 6] {
    [v[0], v[1], v[2], v[3], v[4], v[5]]
}

/// Splits a 6-vector into its linear and angular halves.
pub fn split6(v: &Vec6) -> (Vec3, Vec3) {
    (Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
}

pub fn join6(a: &Vec3, b: &Vec3) -> Vec6 {
    Vec6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}
