//! The simulated peg-insertion task: reward, termination and the
//! policy-rate environment.

mod env;
mod reward;

pub use env::{
    ControlConfig, EnvConfig, EpisodeRecord, EpisodeSpec, PegInsertionEnv, PoseConfig,
    SensorConfig, StepInfo, StepResult, OBS_DIM,
};
pub use reward::{
    compute_reward, l12_norm, l12_normalized, linear_map, RewardConfig, Scale, Termination,
    KAPPA_COLLISION, KAPPA_SUCCESS,
};
