//! Penalty (spring-damper) contact between a square peg and a task board
//! with a square hole.
//!
//! The board occupies `z < surface_z` except for the hole, a square prism
//! of half-width `peg_half_width + clearance / 2` and depth `hole_depth`.
//! The peg frame sits at the centre of the peg's bottom face with the peg
//! extending along its local `+z`. Each contact feature (bottom face and
//! the four side faces) is sampled by points whose weights sum to one, so
//! a feature penetrating uniformly by `d` carries `k_c d`.

use serde::{Deserialize, Serialize};

use crate::math::{Pose, Twist, Vec3, Wrench};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams {
    pub surface_z: f64,
    pub hole_center: [f64; 2],
    pub peg_half_width: f64,
    /// Total clearance: hole width minus peg width.
    pub clearance: f64,
    pub hole_depth: f64,
    pub peg_length: f64,
    /// Contact stiffness (N/m).
    pub stiffness: f64,
    /// Contact damping (N s/m).
    pub damping: f64,
    pub friction: f64,
    /// Slip speed below which friction is viscous rather than Coulomb.
    pub slip_velocity: f64,
    /// Sample points across the width of each face.
    pub samples_per_edge: usize,
    /// Sample rows along the peg length on each side face.
    pub side_rows: usize,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            surface_z: 0.0,
            hole_center: [0.0, 0.0],
            peg_half_width: 0.010,
            clearance: 0.001,
            hole_depth: 0.020,
            peg_length: 0.040,
            stiffness: 1e5,
            damping: 50.0,
            friction: 0.3,
            slip_velocity: 1e-3,
            samples_per_edge: 3,
            side_rows: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SamplePoint {
    /// Offset from the peg frame origin, peg frame.
    local: Vec3,
    weight: f64,
}

/// Penetration of a world point into the board: depth and outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penetration {
    pub depth: f64,
    pub normal: Vec3,
}

#[derive(Debug, Clone)]
pub struct ContactWorld {
    params: ContactParams,
    hole_half_width: f64,
    features: Vec<Vec<SamplePoint>>,
}

impl ContactWorld {
    pub fn new(params: ContactParams) -> Self {
        let n = params.samples_per_edge.max(2);
        let hw = params.peg_half_width;
        let grid = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let w = 1.0 / (n * n) as f64;
        let mut features = Vec::with_capacity(5);
        // bottom face
        features.push(
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| SamplePoint {
                    local: Vec3::new(hw * grid(i), hw * grid(j), 0.0),
                    weight: w,
                })
                .collect(),
        );
        // side faces +x, -x, +y, -y; rows start above the bottom edge,
        // which the bottom face already samples
        let len = params.peg_length;
        let rows = params.side_rows.max(1);
        let ws = 1.0 / (n * rows) as f64;
        for (axis, sign) in [(0usize, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)] {
            features.push(
                (0..n)
                    .flat_map(|i| (0..rows).map(move |j| (i, j)))
                    .map(|(i, j)| {
                        let mut local = Vec3::zeros();
                        local[axis] = sign * hw;
                        local[1 - axis] = hw * grid(i);
                        local.z = len * (j + 1) as f64 / rows as f64;
                        SamplePoint { local, weight: ws }
                    })
                    .collect(),
            );
        }
        Self {
            hole_half_width: params.peg_half_width + 0.5 * params.clearance,
            params,
            features,
        }
    }

    pub fn params(&self) -> &ContactParams {
        &self.params
    }

    pub fn hole_half_width(&self) -> f64 {
        self.hole_half_width
    }

    /// Penetration of a world-frame point into the board, if any.
    pub fn penetration(&self, p: &Vec3) -> Option<Penetration> {
        let pr = &self.params;
        let z = p.z - pr.surface_z;
        if z >= 0.0 {
            return None;
        }
        let dx = p.x - pr.hole_center[0];
        let dy = p.y - pr.hole_center[1];
        let h = self.hole_half_width;
        let ox = (dx.abs() - h).max(0.0);
        let oy = (dy.abs() - h).max(0.0);
        let floor = -pr.hole_depth;
        if ox == 0.0 && oy == 0.0 {
            // within the hole footprint: only the floor
            return (z < floor).then(|| Penetration {
                depth: floor - z,
                normal: Vec3::z(),
            });
        }
        let mut best = Penetration {
            depth: -z,
            normal: Vec3::z(),
        };
        if z > floor {
            let lateral = (ox * ox + oy * oy).sqrt();
            if lateral < best.depth {
                best = Penetration {
                    depth: lateral,
                    normal: Vec3::new(-dx.signum() * ox, -dy.signum() * oy, 0.0) / lateral,
                };
            }
        }
        Some(best)
    }

    /// Contact wrench on the peg, world frame, about the peg frame origin.
    pub fn wrench(&self, peg: &Pose, twist: &Twist) -> Wrench {
        let pr = &self.params;
        let mut total = Wrench::zero();
        for feature in &self.features {
            for sp in feature {
                let r = peg.phi.rotate(&sp.local);
                let Some(pen) = self.penetration(&(peg.p + r)) else {
                    continue;
                };
                let v = twist.linear + twist.angular.cross(&r);
                let rate = -v.dot(&pen.normal);
                let fn_mag = sp.weight * (pr.stiffness * pen.depth + pr.damping * rate);
                if fn_mag <= 0.0 {
                    continue;
                }
                let vt = v - pen.normal * v.dot(&pen.normal);
                let speed = vt.norm();
                let ft = if speed > 0.0 {
                    -vt * (pr.friction * fn_mag / speed.max(pr.slip_velocity))
                } else {
                    Vec3::zeros()
                };
                let f = pen.normal * fn_mag + ft;
                total.force += f;
                total.torque += r.cross(&f);
            }
        }
        total
    }
}
