use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::math::{Pose, Quaternion, Vec3};

/// Tolerance on out-of-plane components accepted by the planar IK.
const PLANAR_TOLERANCE: f64 = 1e-6;

/// Forward and inverse kinematics of a position-controlled robot.
pub trait Kinematics {
    fn dof(&self) -> usize;
    fn fk(&self, q: &[f64]) -> Pose;
    /// Joint configuration reaching `target`, choosing the branch nearest to
    /// `q_near`; `None` when the target is unreachable.
    fn ik(&self, target: &Pose, q_near: &[f64]) -> Option<Vec<f64>>;
    /// Task axes `[x, y, z, rx, ry, rz]` the robot can move along.
    fn axis_mask(&self) -> [bool; 6];
}

/// A robot whose configuration is its task-space pose: position followed
/// by the rotation vector of the orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeFlyer {
    pub workspace_min: [f64; 3],
    pub workspace_max: [f64; 3],
    /// Largest reachable rotation angle from the reference orientation.
    pub max_angle: f64,
}

impl Default for FreeFlyer {
    fn default() -> Self {
        Self {
            workspace_min: [-0.2, -0.2, -0.1],
            workspace_max: [0.2, 0.2, 0.3],
            max_angle: 1.0,
        }
    }
}

impl FreeFlyer {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.workspace_min[i] && p[i] <= self.workspace_max[i])
    }
}

impl Kinematics for FreeFlyer {
    fn dof(&self) -> usize {
        6
    }

    fn fk(&self, q: &[f64]) -> Pose {
        Pose::new(
            Vec3::new(q[0], q[1], q[2]),
            Quaternion::from_rotation_vector(&Vec3::new(q[3], q[4], q[5])),
        )
    }

    fn ik(&self, target: &Pose, _q_near: &[f64]) -> Option<Vec<f64>> {
        if !self.contains(&target.p) || !target.phi.is_unit() {
            return None;
        }
        let rv = target.phi.to_rotation_vector();
        if rv.norm() > self.max_angle {
            return None;
        }
        Some(vec![target.p.x, target.p.y, target.p.z, rv.x, rv.y, rv.z])
    }

    fn axis_mask(&self) -> [bool; 6] {
        [true; 6]
    }
}

/// Planar three-revolute arm. Its own frame has the arm plane as x-y and
/// the joint axes along z; `mount` places that frame in the world and
/// `tool` offsets the controlled frame from the last link's tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planar3R {
    pub lengths: [f64; 3],
    #[serde(default)]
    pub mount: Pose,
    #[serde(default)]
    pub tool: Pose,
}

impl Default for Planar3R {
    fn default() -> Self {
        Self {
            lengths: [0.3, 0.3, 0.1],
            mount: Pose::default(),
            tool: Pose::default(),
        }
    }
}

fn wrap_near(angle: f64, near: f64) -> f64 {
    angle + TAU * ((near - angle) / TAU).round()
}

impl Planar3R {
    /// Mounting that maps the arm plane onto the world x-z plane, with
    /// the tool frame aligned to the world at zero tip angle.
    pub fn vertical(lengths: [f64; 3], base: Vec3) -> Self {
        let r = Quaternion::from_axis_angle(&Vec3::x(), 0.5 * PI);
        Self {
            lengths,
            mount: Pose::new(base, r),
            tool: Pose::new(Vec3::zeros(), r.conjugate()),
        }
    }

    pub fn reach(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Tip position and angle in the arm plane.
    pub fn planar_fk(&self, q: &[f64]) -> (f64, f64, f64) {
        let [l1, l2, l3] = self.lengths;
        let (a1, a2, a3) = (q[0], q[0] + q[1], q[0] + q[1] + q[2]);
        (
            l1 * a1.cos() + l2 * a2.cos() + l3 * a3.cos(),
            l1 * a1.sin() + l2 * a2.sin() + l3 * a3.sin(),
            a3,
        )
    }
}

impl Kinematics for Planar3R {
    fn dof(&self) -> usize {
        3
    }

    fn fk(&self, q: &[f64]) -> Pose {
        let (x, y, theta) = self.planar_fk(q);
        let local = Pose::new(
            Vec3::new(x, y, 0.0),
            Quaternion::from_axis_angle(&Vec3::z(), theta),
        );
        self.mount.compose(&local).compose(&self.tool)
    }

    fn ik(&self, target: &Pose, q_near: &[f64]) -> Option<Vec<f64>> {
        let local = self
            .mount
            .inverse()
            .compose(target)
            .compose(&self.tool.inverse());
        let phi = local.phi.canonical();
        if local.p.z.abs() > PLANAR_TOLERANCE
            || phi.eps.x.abs() > PLANAR_TOLERANCE
            || phi.eps.y.abs() > PLANAR_TOLERANCE
        {
            return None;
        }
        let theta = 2.0 * phi.eps.z.atan2(phi.eta);
        let [l1, l2, l3] = self.lengths;
        let wx = local.p.x - l3 * theta.cos();
        let wy = local.p.y - l3 * theta.sin();
        let c2 = (wx * wx + wy * wy - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
        if !(c2.abs() <= 1.0 + 1e-12) {
            return None;
        }
        let c2 = c2.clamp(-1.0, 1.0);
        let s2_abs = (1.0 - c2 * c2).sqrt();
        let near = |i: usize| q_near.get(i).copied().unwrap_or(0.0);
        [s2_abs, -s2_abs]
            .iter()
            .map(|&s2| {
                let q2 = s2.atan2(c2);
                let q1 = wy.atan2(wx) - (l2 * s2).atan2(l1 + l2 * c2);
                let q3 = theta - q1 - q2;
                vec![
                    wrap_near(q1, near(0)),
                    wrap_near(q2, near(1)),
                    wrap_near(q3, near(2)),
                ]
            })
            .min_by(|a, b| {
                let d = |q: &Vec<f64>| (0..3).map(|i| (q[i] - near(i)).powi(2)).sum::<f64>();
                d(a).total_cmp(&d(b))
            })
    }

    fn axis_mask(&self) -> [bool; 6] {
        // in-plane translation and rotation about the plane normal, in world axes
        let n = self.mount.phi.rotate(&Vec3::z());
        let mut mask = [false; 6];
        for i in 0..3 {
            mask[i] = n[i].abs() < 1.0 - 1e-9;
            mask[3 + i] = n[i].abs() > 1e-9;
        }
        mask
    }
}

/// The robot models available to an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RobotModel {
    FreeFlyer(FreeFlyer),
    Planar3r(Planar3R),
}

impl Default for RobotModel {
    fn default() -> Self {
        Self::FreeFlyer(FreeFlyer::default())
    }
}

impl Kinematics for RobotModel {
    fn dof(&self) -> usize {
        match self {
            Self::FreeFlyer(r) => r.dof(),
            Self::Planar3r(r) => r.dof(),
        }
    }
    fn fk(&self, q: &[f64]) -> Pose {
        match self {
            Self::FreeFlyer(r) => r.fk(q),
            Self::Planar3r(r) => r.fk(q),
        }
    }
    fn ik(&self, target: &Pose, q_near: &[f64]) -> Option<Vec<f64>> {
        match self {
            Self::FreeFlyer(r) => r.ik(target, q_near),
            Self::Planar3r(r) => r.ik(target, q_near),
        }
    }
    fn axis_mask(&self) -> [bool; 6] {
        match self {
            Self::FreeFlyer(r) => r.axis_mask(),
            Self::Planar3r(r) => r.axis_mask(),
        }
    }
}
