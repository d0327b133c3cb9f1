use crate::math::Vec6;

/// Integral gain as a fraction of the force proportional gain.
pub const KI_RATIO: f64 = 0.01;

/// Diagonal selection matrix; each entry is the share of authority the
/// position branch holds on that axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionMatrix(Vec6);

impl SelectionMatrix {
    /// Entries are clamped into `[0, 1]`; NaN becomes 0.
    pub fn new(s: Vec6) -> Self {
        Self(s.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
    }

    pub fn uniform(s: f64) -> Self {
        Self::new(Vec6::repeat(s))
    }

    pub fn diag(&self) -> &Vec6 {
        &self.0
    }
}

/// Parallel position/force gains. Only `kp_x`, `kp_f` and `s` are free;
/// `kd_x = 2 sqrt(kp_x)` and `ki_f = 0.01 kp_f` are rederived on every
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelGains {
    kp_x: Vec6,
    kd_x: Vec6,
    kp_f: Vec6,
    ki_f: Vec6,
    s: SelectionMatrix,
}

impl ParallelGains {
    pub fn new(kp_x: Vec6, kp_f: Vec6, s: SelectionMatrix) -> Self {
        let kp_x = kp_x.map(|v| v.max(0.0));
        let kp_f = kp_f.map(|v| v.max(0.0));
        Self {
            kd_x: kp_x.map(|v| 2.0 * v.sqrt()),
            ki_f: kp_f * KI_RATIO,
            kp_x,
            kp_f,
            s,
        }
    }

    pub fn kp_x(&self) -> &Vec6 {
        &self.kp_x
    }
    pub fn kd_x(&self) -> &Vec6 {
        &self.kd_x
    }
    pub fn kp_f(&self) -> &Vec6 {
        &self.kp_f
    }
    pub fn ki_f(&self) -> &Vec6 {
        &self.ki_f
    }
    pub fn selection(&self) -> &SelectionMatrix {
        &self.s
    }
}

/// PID parallel position/force controller with a selection matrix:
///
/// `u = S (Kp x_e + Kd xdot_e) + a_x + (I - S)(Kpf F + Kif int F dt)`
///
/// `u` is a task-space velocity command; the caller advances the pose
/// command by `u * dt` each inner step.
#[derive(Debug, Clone)]
pub struct ParallelController {
    gains: ParallelGains,
    f_integral: Vec6,
    integral_limit: Vec6,
}

impl ParallelController {
    /// `integral_limit` bounds `|int F dt|` per axis (anti-windup).
    pub fn new(gains: ParallelGains, integral_limit: Vec6) -> Self {
        Self {
            gains,
            f_integral: Vec6::zeros(),
            integral_limit: integral_limit.map(f64::abs),
        }
    }

    pub fn gains(&self) -> &ParallelGains {
        &self.gains
    }

    pub fn set_gains(&mut self, gains: ParallelGains) {
        self.gains = gains;
    }

    pub fn f_integral(&self) -> &Vec6 {
        &self.f_integral
    }

    pub fn position_branch(&self, x_e: &Vec6, xdot_e: &Vec6) -> Vec6 {
        self.gains.kp_x.component_mul(x_e) + self.gains.kd_x.component_mul(xdot_e)
    }

    pub fn force_branch(&self, f_ext: &Vec6) -> Vec6 {
        self.gains.kp_f.component_mul(f_ext) + self.gains.ki_f.component_mul(&self.f_integral)
    }

    /// Evaluates the control law with the current integral state, then
    /// advances the integral by `f_ext * dt` (clamped).
    pub fn step(&mut self, x_e: &Vec6, xdot_e: &Vec6, a_x: &Vec6, f_ext: &Vec6, dt: f64) -> Vec6 {
        let s = self.gains.s.diag();
        let pos = self.position_branch(x_e, xdot_e);
        let force = self.force_branch(f_ext);
        let u = Vec6::from_fn(|i, _| s[i] * pos[i] + a_x[i] + (1.0 - s[i]) * force[i]);
        self.f_integral = Vec6::from_fn(|i, _| {
            let lim = self.integral_limit[i];
            (self.f_integral[i] + f_ext[i] * dt).clamp(-lim, lim)
        });
        u
    }

    pub fn reset(&mut self) {
        self.f_integral = Vec6::zeros();
    }
}
