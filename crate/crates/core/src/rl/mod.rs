//! Soft Actor-Critic from scratch: tanh multilayer perceptrons with
//! hand-derived backpropagation, a squashed Gaussian policy, twin critics,
//! automatic entropy temperature, replay and checkpoints.

mod adam;
mod checkpoint;
pub mod losses;
mod mlp;
pub mod policy;
mod replay;
mod sac;

pub use adam::Adam;
pub use checkpoint::Checkpoint;
pub use mlp::{Mlp, MlpCache};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use sac::{Sac, SacConfig, UpdateReport};
