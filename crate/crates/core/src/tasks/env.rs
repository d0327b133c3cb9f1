use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::reward::{compute_reward, RewardConfig, Termination};
use crate::controllers::{
    apply_admittance_actions, apply_parallel_actions, expand_action, ActionSpaceModel,
    AdmittanceController, AdmittanceSchedules, Controller, GainSchedule, ParallelController,
    ParallelSchedules, Scheme,
};
use crate::error::{Error, Result};
use crate::math::{pose_error, vec6_from, Pose, Quaternion, Vec3, Vec6, Wrench};
use crate::safety::{gate, is_collision, GateVerdict, SafetyLimits, SafetyStats};
use crate::sim::{ContactParams, ContactWorld, FtSensor, Kinematics, RobotModel, World};

/// A pose written as position and rotation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseConfig {
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
}

impl PoseConfig {
    pub fn to_pose(&self) -> Pose {
        Pose::new(
            Vec3::from_column_slice(&self.position),
            Quaternion::from_rotation_vector(&Vec3::from_column_slice(&self.rotation)),
        )
    }
}

/// Start and goal of every episode, the step cap and the success test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSpec {
    pub start: PoseConfig,
    pub goal: PoseConfig,
    pub max_steps: usize,
    /// Position error below which the episode succeeds (m).
    pub success_threshold: f64,
    /// Optional orientation error bound for success (rad).
    #[serde(default)]
    pub orientation_threshold: Option<f64>,
    /// Standard deviation of the Gaussian perturbation of the start pose
    /// per axis (m, rad).
    pub start_jitter: [f64; 6],
}

impl Default for EpisodeSpec {
    fn default() -> Self {
        Self {
            start: PoseConfig {
                position: [0.0, 0.0, 0.01],
                rotation: [0.0; 3],
            },
            goal: PoseConfig {
                position: [0.0, 0.0, -0.015],
                rotation: [0.0; 3],
            },
            max_steps: 150,
            success_threshold: 1e-3,
            orientation_threshold: None,
            start_jitter: [0.002, 0.002, 0.0, 0.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub noise_std: [f64; 6],
    pub cutoff_hz: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            noise_std: [0.1, 0.1, 0.1, 0.005, 0.005, 0.005],
            cutoff_hz: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub model: ActionSpaceModel,
    pub parallel: ParallelSchedules,
    pub admittance: AdmittanceSchedules,
    /// Largest pose displacement the policy can add per policy step (m, rad).
    pub a_max: [f64; 6],
    /// Anti-windup bound on the force integral (N s).
    pub integral_limit: [f64; 6],
    /// Velocity guard of the admittance state.
    pub admittance_v_limit: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            model: ActionSpaceModel::P14,
            parallel: ParallelSchedules {
                kp_x: GainSchedule::uniform(30.0, 25.0),
                kp_f: GainSchedule::split(0.01, 0.009, 0.1, 0.09),
                selection: GainSchedule::uniform(0.5, 0.5),
            },
            admittance: AdmittanceSchedules {
                kp_x: GainSchedule::uniform(30.0, 25.0),
                stiffness: GainSchedule::split(500.0, 450.0, 50.0, 45.0),
                inertia: [0.1; 6],
                zeta: 1.0,
            },
            a_max: [0.002, 0.002, 0.002, 0.02, 0.02, 0.02],
            integral_limit: [10.0, 10.0, 10.0, 1.0, 1.0, 1.0],
            admittance_v_limit: 0.5,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        self.parallel.validate()?;
        self.admittance.validate()?;
        if self
            .a_max
            .iter()
            .chain(&self.integral_limit)
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::Config(
                "control.a_max and control.integral_limit must be >= 0".into(),
            ));
        }
        if !(self.admittance_v_limit > 0.0) {
            return Err(Error::Config(
                "control.admittance_v_limit must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Everything that defines the peg-insertion environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub robot: RobotModel,
    pub contact: ContactParams,
    pub episode: EpisodeSpec,
    pub control: ControlConfig,
    pub reward: RewardConfig,
    pub safety: SafetyLimits,
    pub sensor: SensorConfig,
    /// Policy period (s).
    pub policy_period: f64,
    /// Controller, gate and simulation period (s).
    pub control_period: f64,
    /// First-order actuator lag time constant (s).
    pub lag_tau: f64,
    /// Velocity normalization of the observation (m/s, rad/s).
    pub obs_velocity_scale: [f64; 6],
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            robot: RobotModel::default(),
            contact: ContactParams::default(),
            episode: EpisodeSpec::default(),
            control: ControlConfig::default(),
            reward: RewardConfig::default(),
            safety: SafetyLimits {
                qdot_max: vec![1.5, 1.5, 1.5, 3.0, 3.0, 3.0],
                f_max: 20.0,
                torque_max: 2.0,
            },
            sensor: SensorConfig::default(),
            policy_period: 0.05,
            control_period: 0.002,
            lag_tau: 0.02,
            obs_velocity_scale: [0.1, 0.1, 0.1, 1.0, 1.0, 1.0],
        }
    }
}

impl EnvConfig {
    /// Number of control substeps per policy step.
    pub fn substeps(&self) -> usize {
        (self.policy_period / self.control_period).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.policy_period > 0.0 && self.control_period > 0.0) {
            return Err(Error::Config("periods must be positive".into()));
        }
        let n = self.substeps();
        if n == 0 || (n as f64 * self.control_period - self.policy_period).abs() > 1e-9 {
            return Err(Error::Config(
                "policy_period must be a whole multiple of control_period".into(),
            ));
        }
        if self.episode.max_steps == 0 {
            return Err(Error::Config("episode.max_steps must be >= 1".into()));
        }
        if !(self.episode.success_threshold > 0.0)
            || self.episode.start_jitter.iter().any(|v| !(*v >= 0.0))
        {
            return Err(Error::Config(
                "episode thresholds and jitter must be positive".into(),
            ));
        }
        if !(self.lag_tau >= 0.0) || self.obs_velocity_scale.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config(
                "lag_tau must be >= 0 and obs_velocity_scale > 0".into(),
            ));
        }
        if self.sensor.noise_std.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("sensor.noise_std must be >= 0".into()));
        }
        self.control.validate()?;
        self.reward.validate()?;
        self.safety.validate(self.robot.dof())?;
        let home = vec![0.0; self.robot.dof()];
        for (what, p) in [("start", &self.episode.start), ("goal", &self.episode.goal)] {
            if self.robot.ik(&p.to_pose(), &home).is_none() {
                return Err(Error::Config(format!(
                    "episode.{what} is unreachable for the robot model"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of a finished episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub reward: f64,
    pub steps: usize,
    pub termination: Termination,
}

impl EpisodeRecord {
    pub fn collision(&self) -> bool {
        self.termination == Termination::Collision
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepInfo {
    pub termination: Option<Termination>,
    pub executed: u32,
    pub holds_no_ik: u32,
    pub holds_velocity: u32,
    pub aborted: bool,
    pub saturated: bool,
    /// Largest filtered force relative to its limit seen in any substep.
    pub peak_force_ratio: f64,
    /// True contact wrench at the end of the step.
    pub true_wrench: Wrench,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Terminal state (success or collision).
    pub done: bool,
    /// Episode cut by the step cap.
    pub truncated: bool,
    pub info: StepInfo,
}

pub const OBS_DIM: usize = 18;
const OBS_CLIP: f64 = 5.0;

/// Simulated peg insertion with a policy-rate step wrapping the
/// controller, the safety gate, the world and the sensor at control rate.
#[derive(Debug, Clone)]
pub struct PegInsertionEnv {
    cfg: EnvConfig,
    world: World,
    controller: Controller,
    sensor: FtSensor,
    rng: ChaCha8Rng,
    goal: Pose,
    x_c: Pose,
    mask: Vec6,
    steps: usize,
    episode_reward: f64,
    finished: Option<Termination>,
    stats: SafetyStats,
}

fn mask_vec(mask: [bool; 6]) -> Vec6 {
    Vec6::from_fn(|i, _| if mask[i] { 1.0 } else { 0.0 })
}

impl PegInsertionEnv {
    pub fn new(cfg: EnvConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sensor = FtSensor::from_cutoff(
            vec6_from(&cfg.sensor.noise_std),
            cfg.sensor.cutoff_hz,
            cfg.control_period,
            rng.random(),
        )?;
        let zero = vec![Vec6::zeros(); 3];
        let controller = match cfg.control.model.scheme() {
            Scheme::Parallel => Controller::Parallel(ParallelController::new(
                apply_parallel_actions(&cfg.control.parallel, &zero)?,
                vec6_from(&cfg.control.integral_limit),
            )),
            Scheme::Admittance => Controller::Admittance(AdmittanceController::new(
                apply_admittance_actions(&cfg.control.admittance, &zero[..2])?,
                cfg.control.admittance_v_limit,
            )),
        };
        let home = vec![0.0; cfg.robot.dof()];
        let q0 = cfg
            .robot
            .ik(&cfg.episode.start.to_pose(), &home)
            .expect("validated start");
        let world = World::new(
            cfg.robot.clone(),
            ContactWorld::new(cfg.contact.clone()),
            cfg.lag_tau,
            q0,
        );
        let mask = mask_vec(cfg.robot.axis_mask());
        let goal = cfg.episode.goal.to_pose();
        let x_c = *world.pose();
        Ok(Self {
            cfg,
            world,
            controller,
            sensor,
            rng,
            goal,
            x_c,
            mask,
            steps: 0,
            episode_reward: 0.0,
            finished: Some(Termination::Timeout),
            stats: SafetyStats::default(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn action_dim(&self) -> usize {
        self.cfg.control.model.dim()
    }

    pub fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn controller(&self) -> &Controller {
        &self.controller
    }

    pub fn goal(&self) -> &Pose {
        &self.goal
    }

    pub fn command(&self) -> &Pose {
        &self.x_c
    }

    pub fn stats(&self) -> &SafetyStats {
        &self.stats
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Reward accumulated in the current episode.
    pub fn episode_reward(&self) -> f64 {
        self.episode_reward
    }

    pub fn is_done(&self) -> bool {
        self.finished.is_some()
    }

    /// Masked pose error to the goal.
    pub fn pose_error(&self) -> Vec6 {
        pose_error(&self.goal, self.world.pose())
            .expect("poses stay unit")
            .component_mul(&self.mask)
    }

    /// Position branch of the active controller toward the goal.
    pub fn nominal_goal_drive(&self, x_e: &Vec6, xdot_e: &Vec6) -> Vec6 {
        self.controller.position_branch(x_e, xdot_e)
    }

    /// Reseeds the start jitter and sensor noise streams.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let sensor_seed: u64 = self.rng.random();
        self.sensor = FtSensor::from_cutoff(
            vec6_from(&self.cfg.sensor.noise_std),
            self.cfg.sensor.cutoff_hz,
            self.cfg.control_period,
            sensor_seed,
        )
        .expect("validated sensor");
    }

    /// Starts a new episode at the jittered start pose.
    pub fn reset(&mut self) -> Vec<f64> {
        let jitter = &self.cfg.episode.start_jitter;
        let mut noise = Vec6::zeros();
        for i in 0..6 {
            if jitter[i] > 0.0 {
                let n: f64 = self.rng.sample(StandardNormal);
                noise[i] = jitter[i] * n;
            }
        }
        let noise = noise.component_mul(&self.mask);
        let nominal = self.cfg.episode.start.to_pose();
        let start = Pose::new(
            nominal.p + Vec3::new(noise[0], noise[1], noise[2]),
            Quaternion::from_rotation_vector(&Vec3::new(noise[3], noise[4], noise[5]))
                .mul(&nominal.phi),
        );
        let q_near = self.world.q().to_vec();
        let q0 = self
            .cfg
            .robot
            .ik(&start, &q_near)
            .or_else(|| self.cfg.robot.ik(&nominal, &q_near))
            .expect("validated start");
        self.world.teleport(q0);
        self.x_c = *self.world.pose();
        self.controller.reset();
        self.sensor.reset();
        self.steps = 0;
        self.episode_reward = 0.0;
        self.finished = None;
        self.observe()
    }

    fn observe(&self) -> Vec<f64> {
        let x_e = self.pose_error();
        let xdot = self.world.twist().to_vec6().component_mul(&self.mask);
        let f = self.sensor.output().to_vec6();
        let x_max = self.cfg.reward.x_max.per_axis();
        let f_max = self.cfg.reward.f_max.per_axis();
        let mut obs = Vec::with_capacity(OBS_DIM);
        for i in 0..6 {
            obs.push(x_e[i] / x_max[i]);
        }
        for i in 0..6 {
            obs.push(xdot[i] / self.cfg.obs_velocity_scale[i]);
        }
        for i in 0..6 {
            obs.push(f[i] / f_max[i]);
        }
        obs.iter().map(|v| v.clamp(-OBS_CLIP, OBS_CLIP)).collect()
    }

    fn succeeded(&self) -> bool {
        let e = pose_error(&self.goal, self.world.pose()).expect("poses stay unit");
        let pos = Vec3::new(e[0], e[1], e[2]).norm();
        let rot = Vec3::new(e[3], e[4], e[5]).norm();
        pos < self.cfg.episode.success_threshold
            && self
                .cfg
                .episode
                .orientation_threshold
                .is_none_or(|t| rot < t)
    }

    /// Applies one policy action for one policy period.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.finished.is_some() {
            return Err(Error::EpisodeDone);
        }
        let expanded = expand_action(self.cfg.control.model, action)?;
        self.controller.apply_gain_actions(
            &self.cfg.control.parallel,
            &self.cfg.control.admittance,
            &expanded.groups,
        )?;
        // a_x is a displacement per policy step, spread evenly over the substeps
        let a_x = expanded
            .a_x
            .component_mul(&vec6_from(&self.cfg.control.a_max))
            .component_mul(&self.mask)
            / self.cfg.policy_period;

        let dt = self.cfg.control_period;
        let limits = &self.cfg.safety;
        let force_scale = Vec6::new(
            limits.f_max,
            limits.f_max,
            limits.f_max,
            limits.torque_max,
            limits.torque_max,
            limits.torque_max,
        );
        let mut info = StepInfo::default();
        for _ in 0..self.cfg.substeps() {
            let f = self.sensor.output();
            let x_e = self.pose_error();
            let xdot_e = -self.world.twist().to_vec6().component_mul(&self.mask);
            let out = self.controller.step(&x_e, &xdot_e, &a_x, &f.to_vec6(), dt);
            info.saturated |= out.saturated;
            let candidate = self.x_c.integrate(&out.u.component_mul(&self.mask), dt);
            let verdict = gate(
                limits,
                self.world.robot(),
                self.world.q(),
                &candidate,
                &f,
                dt,
            );
            self.stats.record(&verdict);
            let state = match verdict {
                GateVerdict::Execute(q_c) => {
                    info.executed += 1;
                    self.x_c = candidate;
                    self.world.step(&q_c, dt)
                }
                GateVerdict::HoldNoIk | GateVerdict::HoldVelocity => {
                    if verdict == GateVerdict::HoldNoIk {
                        info.holds_no_ik += 1;
                    } else {
                        info.holds_velocity += 1;
                    }
                    // restart the command from where the robot actually is
                    self.x_c = *self.world.pose();
                    self.world.hold()
                }
                GateVerdict::AbortForce => {
                    info.aborted = true;
                    break;
                }
            };
            let sensed = self.sensor.sense(&state.wrench);
            let ratio = sensed.to_vec6().component_div(&force_scale).amax();
            info.peak_force_ratio = info.peak_force_ratio.max(ratio);
            info.true_wrench = state.wrench;
        }
        // a violation sensed in the last substep still ends this policy step
        if !info.aborted && is_collision(limits, &self.sensor.output()) {
            info.aborted = true;
            self.stats.record(&GateVerdict::AbortForce);
        }
        self.steps += 1;

        let termination = if info.aborted {
            Some(Termination::Collision)
        } else if self.succeeded() {
            Some(Termination::Success)
        } else if self.steps >= self.cfg.episode.max_steps {
            Some(Termination::Timeout)
        } else {
            None
        };
        info.termination = termination;
        let x_e = self.pose_error();
        let reward = compute_reward(
            &self.cfg.reward,
            &x_e,
            action,
            &self.sensor.output().to_vec6(),
            termination,
        );
        self.episode_reward += reward;
        self.finished = termination;
        Ok(StepResult {
            obs: self.observe(),
            reward,
            done: termination.is_some_and(Termination::is_terminal),
            truncated: termination == Some(Termination::Timeout),
            info,
        })
    }

    /// Summary of the episode that just ended.
    pub fn record(&self) -> Option<EpisodeRecord> {
        self.finished.map(|termination| EpisodeRecord {
            reward: self.episode_reward,
            steps: self.steps,
            termination,
        })
    }
}
