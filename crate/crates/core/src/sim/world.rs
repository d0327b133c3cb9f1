use crate::math::{Pose, Twist, Wrench};

use super::contact::ContactWorld;
use super::robot::{Kinematics, RobotModel};

/// Kinematic robot with a first-order actuator lag, interacting with the
/// task board through penalty contact. The contact wrench does not move
/// the robot: it is a rigid, position-controlled manipulator.
#[derive(Debug, Clone)]
pub struct World {
    robot: RobotModel,
    contact: ContactWorld,
    lag_tau: f64,
    q: Vec<f64>,
    pose: Pose,
    twist: Twist,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub pose: Pose,
    pub twist: Twist,
    /// True (unfiltered) contact wrench.
    pub wrench: Wrench,
}

impl World {
    pub fn new(robot: RobotModel, contact: ContactWorld, lag_tau: f64, q0: Vec<f64>) -> Self {
        let pose = robot.fk(&q0);
        Self {
            robot,
            contact,
            lag_tau: lag_tau.max(0.0),
            q: q0,
            pose,
            twist: Twist::zero(),
        }
    }

    pub fn robot(&self) -> &RobotModel {
        &self.robot
    }

    pub fn contact(&self) -> &ContactWorld {
        &self.contact
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn pose(&self) -> &Pose {
        &self.pose
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    /// Places the robot at rest at `q`.
    pub fn teleport(&mut self, q: Vec<f64>) -> WorldState {
        self.pose = self.robot.fk(&q);
        self.q = q;
        self.twist = Twist::zero();
        self.state()
    }

    pub fn state(&self) -> WorldState {
        WorldState {
            pose: self.pose,
            twist: self.twist,
            wrench: self.contact.wrench(&self.pose, &self.twist),
        }
    }

    /// Moves the configuration toward `q_c`: `q <- q_c + (q - q_c) e^(-dt/tau)`.
    pub fn step(&mut self, q_c: &[f64], dt: f64) -> WorldState {
        let keep = if self.lag_tau > 0.0 {
            (-dt / self.lag_tau).exp()
        } else {
            0.0
        };
        for (q, &target) in self.q.iter_mut().zip(q_c) {
            *q = target + (*q - target) * keep;
        }
        let next = self.robot.fk(&self.q);
        self.twist = Twist::between(&self.pose, &next, dt);
        self.pose = next;
        self.state()
    }

    /// The robot stays where it is for this step.
    pub fn hold(&mut self) -> WorldState {
        self.twist = Twist::zero();
        self.state()
    }
}
