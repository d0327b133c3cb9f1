//! The two learnable force-control schemes, the action-space models that
//! decide which of their gains the policy may modulate, and the mapping of
//! gain actions onto concrete gains.

mod action_space;
mod admittance;
mod parallel;
mod schedule;

pub use action_space::{expand_action, ActionSpaceModel, ExpandedAction, Scheme};
pub use admittance::{AdmittanceController, AdmittanceOutput, AdmittanceParams};
pub use parallel::{ParallelController, ParallelGains, SelectionMatrix, KI_RATIO};
pub use schedule::GainSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{vec6_from, Vec6};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelSchedules {
    pub kp_x: GainSchedule,
    pub kp_f: GainSchedule,
    /// Selection entries are `base + a * range`, clamped into `[0, 1]`.
    pub selection: GainSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmittanceSchedules {
    pub kp_x: GainSchedule,
    pub stiffness: GainSchedule,
    /// Fixed desired inertia per axis.
    pub inertia: [f64; 6],
    pub zeta: f64,
}

impl ParallelSchedules {
    pub fn validate(&self) -> Result<()> {
        self.kp_x.validate("parallel.kp_x")?;
        self.kp_f.validate("parallel.kp_f")?;
        self.selection.validate("parallel.selection")
    }
}

impl AdmittanceSchedules {
    pub fn validate(&self) -> Result<()> {
        self.kp_x.validate("admittance.kp_x")?;
        self.stiffness.validate("admittance.stiffness")?;
        if self.stiffness.lower().iter().any(|v| *v <= 0.0) {
            return Err(Error::Config(
                "admittance.stiffness: base - range must stay > 0".into(),
            ));
        }
        if self.inertia.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("admittance.inertia must be > 0".into()));
        }
        if !(self.zeta >= 0.0) {
            return Err(Error::Config("admittance.zeta must be >= 0".into()));
        }
        Ok(())
    }
}

/// Maps parallel-scheme gain actions `[PD, PI, S]` onto gains.
pub fn apply_parallel_actions(s: &ParallelSchedules, groups: &[Vec6]) -> Result<ParallelGains> {
    if groups.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: groups.len(),
        });
    }
    Ok(ParallelGains::new(
        s.kp_x.map(&groups[0]),
        s.kp_f.map(&groups[1]),
        SelectionMatrix::new(s.selection.map(&groups[2])),
    ))
}

/// Maps admittance-scheme gain actions `[PD, stiffness]` onto parameters.
pub fn apply_admittance_actions(
    s: &AdmittanceSchedules,
    groups: &[Vec6],
) -> Result<AdmittanceParams> {
    if groups.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: groups.len(),
        });
    }
    AdmittanceParams::new(
        vec6_from(&s.inertia),
        s.stiffness.map(&groups[1]),
        s.zeta,
        s.kp_x.map(&groups[0]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// Task-space velocity command; the pose command advances by `u * dt`.
    pub u: Vec6,
    pub saturated: bool,
}

/// The active force controller of an environment.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Controller {
    Parallel(ParallelController),
    Admittance(AdmittanceController),
}

impl Controller {
    pub fn scheme(&self) -> Scheme {
        match self {
            Self::Parallel(_) => Scheme::Parallel,
            Self::Admittance(_) => Scheme::Admittance,
        }
    }

    /// Replaces the gains from already expanded gain-action groups.
    pub fn apply_gain_actions(
        &mut self,
        parallel: &ParallelSchedules,
        admittance: &AdmittanceSchedules,
        groups: &[Vec6],
    ) -> Result<()> {
        match self {
            Self::Parallel(c) => c.set_gains(apply_parallel_actions(parallel, groups)?),
            Self::Admittance(c) => c.set_params(apply_admittance_actions(admittance, groups)?),
        }
        Ok(())
    }

    pub fn step(
        &mut self,
        x_e: &Vec6,
        xdot_e: &Vec6,
        a_x: &Vec6,
        f_ext: &Vec6,
        dt: f64,
    ) -> ControlOutput {
        match self {
            Self::Parallel(c) => ControlOutput {
                u: c.step(x_e, xdot_e, a_x, f_ext, dt),
                saturated: false,
            },
            Self::Admittance(c) => {
                let out = c.step(x_e, xdot_e, a_x, f_ext, dt);
                ControlOutput {
                    u: out.u,
                    saturated: out.saturated,
                }
            }
        }
    }

    /// PD position branch with the current gains (no selection weighting).
    pub fn position_branch(&self, x_e: &Vec6, xdot_e: &Vec6) -> Vec6 {
        match self {
            Self::Parallel(c) => c.position_branch(x_e, xdot_e),
            Self::Admittance(c) => c.position_branch(x_e, xdot_e),
        }
    }

    /// Zeroes the force integral or the admittance state.
    pub fn reset(&mut self) {
        match self {
            Self::Parallel(c) => c.reset(),
            Self::Admittance(c) => c.reset(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedules() -> (ParallelSchedules, AdmittanceSchedules) {
        (
            ParallelSchedules {
                kp_x: GainSchedule::uniform(100.0, 50.0),
                kp_f: GainSchedule::uniform(0.05, 0.04),
                selection: GainSchedule::uniform(0.5, 0.5),
            },
            AdmittanceSchedules {
                kp_x: GainSchedule::uniform(100.0, 50.0),
                stiffness: GainSchedule::uniform(400.0, 300.0),
                inertia: [0.1; 6],
                zeta: 1.0,
            },
        )
    }

    #[test]
    fn base_values_at_zero_action() {
        let (ps, as_) = schedules();
        let g = apply_parallel_actions(&ps, &[Vec6::zeros(); 3]).unwrap();
        assert_eq!(g.kp_x()[0], 100.0);
        assert_eq!(g.kd_x()[0], 20.0);
        assert!((g.ki_f()[0] - 0.0005).abs() < 1e-18);
        assert_eq!(*g.selection().diag(), Vec6::repeat(0.5));
        let a = apply_admittance_actions(&as_, &[Vec6::zeros(); 2]).unwrap();
        assert!((a.b()[0] - 12.649_110_640_673_518).abs() < 1e-12);
    }

    #[test]
    fn stiffness_must_stay_positive() {
        let (_, mut as_) = schedules();
        as_.stiffness = GainSchedule::uniform(100.0, 100.0);
        assert!(as_.validate().is_err());
    }

    #[test]
    fn controller_reset_is_idempotent() {
        let (ps, as_) = schedules();
        let mut c = Controller::Admittance(AdmittanceController::new(
            apply_admittance_actions(&as_, &[Vec6::zeros(); 2]).unwrap(),
            1.0,
        ));
        let f = Vec6::repeat(3.0);
        c.step(&Vec6::zeros(), &Vec6::zeros(), &Vec6::zeros(), &f, 0.002);
        c.reset();
        c.reset();
        if let Controller::Admittance(a) = &c {
            assert_eq!(*a.state_x(), Vec6::zeros());
            assert_eq!(*a.state_v(), Vec6::zeros());
        }
        let mut p = Controller::Parallel(ParallelController::new(
            apply_parallel_actions(&ps, &[Vec6::zeros(); 3]).unwrap(),
            Vec6::repeat(10.0),
        ));
        p.step(&Vec6::zeros(), &Vec6::zeros(), &Vec6::zeros(), &f, 0.002);
        p.reset();
        if let Controller::Parallel(pc) = &p {
            assert_eq!(*pc.f_integral(), Vec6::zeros());
        }
    }
}
