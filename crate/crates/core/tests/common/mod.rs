//! Oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use forcelearn::controllers::{
    apply_admittance_actions, apply_parallel_actions, AdmittanceController, AdmittanceParams,
};
use forcelearn::math::{Pose, Quaternion, Vec3, Vec6, Wrench};
use forcelearn::rl::losses::{critic_loss, policy_loss, temperature_loss};
use forcelearn::rl::policy::standard_normal;
use forcelearn::rl::Mlp;
use forcelearn::safety::{gate, is_collision, GateVerdict, SafetyLimits};
use forcelearn::sim::{
    ContactParams, ContactWorld, FreeFlyer, Kinematics, Planar3R, RobotModel, World,
};
use forcelearn::tasks::{
    compute_reward, ControlConfig, RewardConfig, Termination, KAPPA_COLLISION, KAPPA_SUCCESS,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DT: f64 = 0.002;

// ---- admittance step response ----

pub struct StepResponse {
    /// `(max - x_ss) / x_ss`, negative when the response never reaches x_ss.
    pub overshoot: f64,
    /// RMS deviation from the closed-form response, relative to x_ss.
    pub rms_rel: f64,
}

/// Closed-form unit-step response of `m x'' + b x' + k x = F`, normalized
/// so the steady state is 1.
pub fn second_order_step(zeta: f64, wn: f64, t: f64) -> f64 {
    if (zeta - 1.0).abs() < 1e-12 {
        1.0 - (1.0 + wn * t) * (-wn * t).exp()
    } else if zeta < 1.0 {
        let s = (1.0 - zeta * zeta).sqrt();
        let wd = wn * s;
        1.0 - (-zeta * wn * t).exp() * ((wd * t).cos() + zeta / s * (wd * t).sin())
    } else {
        let s = (zeta * zeta - 1.0).sqrt();
        let (r1, r2) = (-wn * (zeta - s), -wn * (zeta + s));
        1.0 + (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r1 - r2)
    }
}

pub fn analytic_overshoot(zeta: f64) -> f64 {
    (-std::f64::consts::PI * zeta / (1.0 - zeta * zeta).sqrt()).exp()
}

/// Drives the admittance model with a unit force step at the given
/// `omega_n * dt` and compares it with the closed form.
pub fn admittance_step_response(zeta: f64, wn_dt: f64) -> StepResponse {
    let m = 0.1;
    let wn = wn_dt / DT;
    let k = m * wn * wn;
    let params =
        AdmittanceParams::new(Vec6::repeat(m), Vec6::repeat(k), zeta, Vec6::zeros()).unwrap();
    let mut c = AdmittanceController::new(params, f64::INFINITY);
    let force = Vec6::repeat(1.0);
    let x_ss = 1.0 / k;
    let horizon = 20.0 / (zeta.max(0.1) * wn);
    let n = (horizon / DT).ceil() as usize;
    let (mut peak, mut sq) = (f64::NEG_INFINITY, 0.0);
    for i in 1..=n {
        c.integrate(&force, DT);
        let x = c.state_x()[0] / x_ss;
        peak = peak.max(x);
        sq += (x - second_order_step(zeta, wn, i as f64 * DT)).powi(2);
    }
    StepResponse {
        overshoot: peak - 1.0,
        rms_rel: (sq / n as f64).sqrt(),
    }
}

// ---- gain derivations ----

fn random_group(rng: &mut ChaCha8Rng) -> Vec6 {
    Vec6::from_fn(|_, _| rng.random_range(-1.0..=1.0))
}

/// Largest relative residual of `kd = 2 sqrt(kp)`, `ki = 0.01 kp_f` and
/// `b = 2 zeta sqrt(k m)` over random gain actions.
pub fn gain_invariant_residual(n: usize, seed: u64) -> f64 {
    let cfg = ControlConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let groups = [
            random_group(&mut rng),
            random_group(&mut rng),
            random_group(&mut rng),
        ];
        let g = apply_parallel_actions(&cfg.parallel, &groups).unwrap();
        let p = apply_admittance_actions(&cfg.admittance, &groups[..2]).unwrap();
        for i in 0..6 {
            worst = worst
                .max(rel(g.kd_x()[i], 2.0 * g.kp_x()[i].sqrt()))
                .max(rel(g.ki_f()[i], 0.01 * g.kp_f()[i]))
                .max(rel(p.kd_x()[i], 2.0 * p.kp_x()[i].sqrt()))
                .max(rel(p.b()[i], 2.0 * p.zeta() * (p.k()[i] * p.m()[i]).sqrt()));
        }
    }
    worst
}

// ---- safety gate ----

#[derive(Debug, Default)]
pub struct SafetyFuzz {
    pub commands: usize,
    pub executed: usize,
    pub holds: usize,
    pub aborts: usize,
    /// Largest executed joint step relative to `qdot_max * dt`.
    pub worst_velocity_ratio: f64,
    /// Over-limit forces that did not abort.
    pub missed_aborts: usize,
    /// Holds after which the robot state changed.
    pub state_changes: usize,
}

fn limits(dof: usize) -> SafetyLimits {
    let mut qdot_max = vec![1.5; dof];
    if dof == 6 {
        qdot_max[3..].fill(3.0);
    }
    SafetyLimits {
        qdot_max,
        f_max: 20.0,
        torque_max: 2.0,
    }
}

fn random_wrench(rng: &mut ChaCha8Rng) -> Wrench {
    let mut w = Wrench::zero();
    for i in 0..3 {
        w.force[i] = rng.random_range(-24.0..24.0);
        w.torque[i] = rng.random_range(-2.4..2.4);
    }
    if rng.random_bool(0.5) {
        // mostly quiet contact so that non-force verdicts are exercised
        w.force *= 0.5;
        w.torque *= 0.5;
    }
    w
}

/// Sends random commands through the gate for both robot models and
/// applies each verdict to a world.
pub fn safety_fuzz(n: usize, seed: u64) -> SafetyFuzz {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let robots = [
        RobotModel::FreeFlyer(FreeFlyer::default()),
        RobotModel::Planar3r(Planar3R::vertical(
            [0.3, 0.3, 0.1],
            Vec3::new(0.0, 0.0, -0.45),
        )),
    ];
    let mut out = SafetyFuzz::default();
    for k in 0..n {
        let robot = &robots[k % 2];
        let lim = limits(robot.dof());
        let q0: Vec<f64> = match robot {
            RobotModel::FreeFlyer(_) => (0..6)
                .map(|i| {
                    if i < 3 {
                        rng.random_range(-0.15..0.15)
                    } else {
                        rng.random_range(-0.5..0.5)
                    }
                })
                .collect(),
            RobotModel::Planar3r(_) => vec![
                rng.random_range(0.3..1.2),
                rng.random_range(-2.0..-0.3),
                rng.random_range(-1.0..1.0),
            ],
        };
        let mut world = World::new(
            robot.clone(),
            ContactWorld::new(ContactParams::default()),
            0.02,
            q0.clone(),
        );
        let x = *world.pose();
        // command steps from well inside to far beyond the velocity limit
        let scale = 10f64.powf(rng.random_range(-5.0..-1.0));
        let dp = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ) * scale;
        let dr = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ) * scale
            * 10.0;
        let mut target = Pose::new(x.p + dp, Quaternion::from_rotation_vector(&dr).mul(&x.phi));
        if let RobotModel::Planar3r(arm) = robot {
            // planar commands come from joint perturbations; a few are pushed out of reach
            let q_t: Vec<f64> = q0
                .iter()
                .zip([dr.x, dr.y, dr.z])
                .map(|(q, d)| q + 0.1 * d)
                .collect();
            target = arm.fk(&q_t);
            if rng.random_bool(0.05) {
                target.p *= 3.0;
            }
        }
        let f = random_wrench(&mut rng);
        let verdict = gate(&lim, robot, world.q(), &target, &f, DT);
        out.commands += 1;
        if is_collision(&lim, &f) && verdict != GateVerdict::AbortForce {
            out.missed_aborts += 1;
        }
        match verdict {
            GateVerdict::Execute(q_c) => {
                out.executed += 1;
                for ((a, b), m) in q_c.iter().zip(world.q()).zip(&lim.qdot_max) {
                    out.worst_velocity_ratio =
                        out.worst_velocity_ratio.max((a - b).abs() / (m * DT));
                }
                world.step(&q_c, DT);
            }
            GateVerdict::HoldNoIk | GateVerdict::HoldVelocity => {
                out.holds += 1;
                let (q_before, pose_before) = (world.q().to_vec(), *world.pose());
                world.hold();
                let same_q = q_before
                    .iter()
                    .zip(world.q())
                    .all(|(a, b)| a.to_bits() == b.to_bits());
                let p = world.pose();
                let same_pose = (0..3).all(|i| p.p[i].to_bits() == pose_before.p[i].to_bits())
                    && p.phi.eta.to_bits() == pose_before.phi.eta.to_bits()
                    && (0..3).all(|i| p.phi.eps[i].to_bits() == pose_before.phi.eps[i].to_bits());
                if !(same_q && same_pose) {
                    out.state_changes += 1;
                }
            }
            GateVerdict::AbortForce => out.aborts += 1,
        }
    }
    out
}

// ---- SAC gradients ----

pub const FD_STEP: f64 = 1e-5;

/// Largest elementwise relative error with a small absolute floor.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

pub fn central_diff(params: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let x = p[i];
            p[i] = x + FD_STEP;
            let up = f(&p);
            p[i] = x - FD_STEP;
            let down = f(&p);
            p[i] = x;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn random_batch(rng: &mut ChaCha8Rng, rows: usize, n: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, n, |_, _| rng.random_range(-scale..scale))
}

pub fn critic_gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let critic = Mlp::new(&[4, 4, 1], &mut rng).unwrap();
    let obs = random_batch(&mut rng, 2, 8, 1.0);
    let act = random_batch(&mut rng, 2, 8, 0.99);
    let y = DVector::from_fn(8, |_, _| rng.random_range(-2.0..2.0));
    let analytic = critic_loss(&critic, &obs, &act, &y).grad;
    let numeric = central_diff(critic.params(), |p| {
        let c = Mlp::from_params(critic.sizes(), p.to_vec()).unwrap();
        critic_loss(&c, &obs, &act, &y).loss
    });
    max_rel_err(&analytic, &numeric)
}

pub fn policy_gradient_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policy = Mlp::new(&[2, 4, 4], &mut rng).unwrap();
    let q1 = Mlp::new(&[4, 4, 1], &mut rng).unwrap();
    let q2 = Mlp::new(&[4, 4, 1], &mut rng).unwrap();
    let obs = random_batch(&mut rng, 2, 8, 1.0);
    let eps = standard_normal(2, 8, &mut rng);
    let alpha = 0.37;
    let analytic = policy_loss(&policy, &q1, &q2, &obs, &eps, alpha).grad;
    let numeric = central_diff(policy.params(), |p| {
        let pol = Mlp::from_params(policy.sizes(), p.to_vec()).unwrap();
        policy_loss(&pol, &q1, &q2, &obs, &eps, alpha).loss
    });
    max_rel_err(&analytic, &numeric)
}

pub fn temperature_gradient_error() -> f64 {
    let lp = DVector::from_vec(vec![-1.2, 0.4, 2.0, -0.3, 0.9, -2.2, 0.1, 1.5]);
    [-2.0, 0.0, 0.7]
        .iter()
        .map(|&log_alpha| {
            let (_, g) = temperature_loss(log_alpha, &lp, -2.0);
            let numeric = central_diff(&[log_alpha], |p| temperature_loss(p[0], &lp, -2.0).0);
            max_rel_err(&[g], &numeric)
        })
        .fold(0.0, f64::max)
}

// ---- reward ----

/// Checks the terminal values and, over fuzzed inputs, the reward bounds
/// and monotonic decrease in the pose error. Returns the first violation.
pub fn reward_suite(n: usize, seed: u64) -> Result<(), String> {
    let mut cfg = RewardConfig {
        weights: [0.0, 0.0, 0.0, 0.0, 1.0],
        ..Default::default()
    };
    let zero = Vec6::zeros();
    let kappa = |cfg: &RewardConfig, t| compute_reward(cfg, &zero, &[], &zero, t);
    let got = [
        Some(Termination::Success),
        Some(Termination::Collision),
        Some(Termination::Timeout),
        None,
    ]
    .map(|t| kappa(&cfg, t));
    if got != [KAPPA_SUCCESS, KAPPA_COLLISION, 0.0, 0.0]
        || KAPPA_SUCCESS != 200.0
        || KAPPA_COLLISION != -10.0
    {
        return Err(format!("terminal values {got:?}"));
    }
    cfg.penalize_collision = false;
    if kappa(&cfg, Some(Termination::Collision)) != 0.0 {
        return Err("collision without penalty must give 0".into());
    }

    let cfg = RewardConfig::default();
    let [w1, w2, w3, w4, _] = cfg.weights;
    let (lo, hi) = (w4 * cfg.rho, w1 + w2 + w3 + w4 * cfg.rho);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let x_e =
            Vec6::from_fn(|i, _| rng.random_range(-0.1..0.1) * if i < 3 { 1.0 } else { 10.0 });
        let a: Vec<f64> = (0..14).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let f = Vec6::from_fn(|i, _| rng.random_range(-30.0..30.0) * if i < 3 { 1.0 } else { 0.1 });
        let r = compute_reward(&cfg, &x_e, &a, &f, None);
        if !(lo - 1e-12..=hi + 1e-12).contains(&r) {
            return Err(format!("reward {r} outside [{lo}, {hi}]"));
        }
        let shrink = rng.random_range(0.0..1.0);
        let closer = compute_reward(&cfg, &(x_e * shrink), &a, &f, None);
        if closer < r - 1e-12 {
            return Err(format!("moving closer lowered the reward: {r} -> {closer}"));
        }
    }
    Ok(())
}
