//! Learning force-control policies for position-controlled manipulators:
//! parallel position/force and admittance control with policy-modulated
//! gains, a fail-safe command gate, a from-scratch Soft Actor-Critic agent,
//! a simulated peg-insertion task, and the experiment harness around them.

// validation uses `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod controllers;
pub mod error;
pub mod harness;
pub mod math;
pub mod par;
pub mod rl;
pub mod safety;
pub mod sim;
pub mod tasks;

pub use error::{Error, Result};
