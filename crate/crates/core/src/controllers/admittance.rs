use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::{Error, Result};
use crate::math::Vec6;

/// Desired mass-damper-spring behaviour per task axis plus the PD gains of
/// the nominal trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceParams {
    m: Vec6,
    k: Vec6,
    b: Vec6,
    zeta: f64,
    kp_x: Vec6,
    kd_x: Vec6,
}

impl AdmittanceParams {
    /// Damping is derived as `b = 2 zeta sqrt(k m)`, `kd_x = 2 sqrt(kp_x)`.
    pub fn new(m: Vec6, k: Vec6, zeta: f64, kp_x: Vec6) -> Result<Self> {
        if m.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("admittance inertia must be > 0".into()));
        }
        if !(zeta >= 0.0) {
            return Err(Error::Config("damping ratio must be >= 0".into()));
        }
        let k = k.map(|v| v.max(0.0));
        let kp_x = kp_x.map(|v| v.max(0.0));
        Ok(Self {
            b: Vec6::from_fn(|i, _| 2.0 * zeta * (k[i] * m[i]).sqrt()),
            kd_x: kp_x.map(|v| 2.0 * v.sqrt()),
            m,
            k,
            zeta,
            kp_x,
        })
    }

    /// Explicit damping, bypassing the damping-ratio derivation. Used for
    /// analysis of the admittance model in isolation.
    pub fn with_damping(m: Vec6, k: Vec6, b: Vec6) -> Result<Self> {
        let mut p = Self::new(m, k, 0.0, Vec6::zeros())?;
        p.b = b.map(|v| v.max(0.0));
        p.zeta = f64::NAN;
        Ok(p)
    }

    pub fn m(&self) -> &Vec6 {
        &self.m
    }
    pub fn k(&self) -> &Vec6 {
        &self.k
    }
    pub fn b(&self) -> &Vec6 {
        &self.b
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn kp_x(&self) -> &Vec6 {
        &self.kp_x
    }
    pub fn kd_x(&self) -> &Vec6 {
        &self.kd_x
    }

    /// `omega_n = sqrt(k / m)` per axis.
    pub fn natural_frequency(&self) -> Vec6 {
        Vec6::from_fn(|i, _| (self.k[i] / self.m[i]).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmittanceOutput {
    pub u: Vec6,
    pub saturated: bool,
}

/// Task-space admittance controller for a position-controlled robot.
///
/// The admittance state `(x, v)` follows `m xdd + b xd + k x = F_ext`,
/// discretized exactly for a force held over each step. The command is the
/// PD nominal trajectory plus `a_x`, offset by the compliant displacement
/// `x`. In velocity form, `u = Kp x_e + Kd xdot_e + a_x + dx / dt`, so that
/// advancing the command by `u * dt` adds exactly the step's displacement.
#[derive(Debug, Clone)]
pub struct AdmittanceController {
    params: AdmittanceParams,
    state_x: Vec6,
    state_v: Vec6,
    /// Displacement added by the latest step.
    step_dx: Vec6,
    v_limit: f64,
    disc: Option<Discretization>,
}

/// Exact zero-order-hold discretization of each axis,
/// `[x, v]_(n+1) = phi [x, v]_n + gamma f_n`.
#[derive(Debug, Clone)]
struct Discretization {
    dt: f64,
    phi: [Matrix2<f64>; 6],
    gamma: [Vector2<f64>; 6],
}

impl Discretization {
    fn new(p: &AdmittanceParams, dt: f64) -> Self {
        let mut phi = [Matrix2::zeros(); 6];
        let mut gamma = [Vector2::zeros(); 6];
        for i in 0..6 {
            // exp of the augmented system [[A, B], [0, 0]] yields phi and gamma together
            let m = p.m[i];
            #[rustfmt::skip]
            let aug = Matrix3::new(
                0.0, 1.0, 0.0,
                -p.k[i] / m, -p.b[i] / m, 1.0 / m,
                0.0, 0.0, 0.0,
            ) * dt;
            let e = aug.exp();
            phi[i] = e.fixed_view::<2, 2>(0, 0).into_owned();
            gamma[i] = e.fixed_view::<2, 1>(0, 2).into_owned();
        }
        Self { dt, phi, gamma }
    }
}

impl AdmittanceController {
    pub fn new(params: AdmittanceParams, v_limit: f64) -> Self {
        Self {
            params,
            state_x: Vec6::zeros(),
            state_v: Vec6::zeros(),
            step_dx: Vec6::zeros(),
            v_limit: v_limit.abs(),
            disc: None,
        }
    }

    pub fn params(&self) -> &AdmittanceParams {
        &self.params
    }

    pub fn set_params(&mut self, params: AdmittanceParams) {
        if params != self.params {
            self.disc = None;
        }
        self.params = params;
    }

    pub fn state_x(&self) -> &Vec6 {
        &self.state_x
    }

    pub fn state_v(&self) -> &Vec6 {
        &self.state_v
    }

    pub fn position_branch(&self, x_e: &Vec6, xdot_e: &Vec6) -> Vec6 {
        self.params.kp_x.component_mul(x_e) + self.params.kd_x.component_mul(xdot_e)
    }

    /// Advances the admittance model by one step of length `dt` under
    /// `f_ext`, held constant over the step. Returns true when the
    /// velocity guard clamped the state.
    pub fn integrate(&mut self, f_ext: &Vec6, dt: f64) -> bool {
        if self.disc.as_ref().is_none_or(|d| d.dt != dt) {
            self.disc = Some(Discretization::new(&self.params, dt));
        }
        let d = self.disc.as_ref().expect("just set");
        let mut saturated = false;
        self.step_dx = Vec6::zeros();
        for i in 0..6 {
            let (phi, gamma) = (&d.phi[i], &d.gamma[i]);
            let (x, v) = (self.state_x[i], self.state_v[i]);
            let x_next = phi[(0, 0)] * x + phi[(0, 1)] * v + gamma[0] * f_ext[i];
            let mut v_next = phi[(1, 0)] * x + phi[(1, 1)] * v + gamma[1] * f_ext[i];
            let mut dx = x_next - x;
            if !v_next.is_finite() || !dx.is_finite() || v_next.abs() > self.v_limit {
                v_next = if v_next.is_nan() {
                    0.0
                } else {
                    v_next.clamp(-self.v_limit, self.v_limit)
                };
                dx = if dx.is_finite() {
                    dx.clamp(-self.v_limit * dt, self.v_limit * dt)
                } else {
                    0.0
                };
                saturated = true;
            }
            self.state_v[i] = v_next;
            self.state_x[i] = x + dx;
            self.step_dx[i] = dx;
        }
        saturated
    }

    pub fn step(
        &mut self,
        x_e: &Vec6,
        xdot_e: &Vec6,
        a_x: &Vec6,
        f_ext: &Vec6,
        dt: f64,
    ) -> AdmittanceOutput {
        let saturated = self.integrate(f_ext, dt);
        let u = self.position_branch(x_e, xdot_e) + a_x + self.step_dx / dt;
        AdmittanceOutput { u, saturated }
    }

    pub fn reset(&mut self) {
        self.state_x = Vec6::zeros();
        self.state_v = Vec6::zeros();
        self.step_dx = Vec6::zeros();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 0.002;

    fn e0(v: f64) -> Vec6 {
        Vec6::new(v, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    #[test]
    fn derived_damping() {
        let p = AdmittanceParams::new(
            Vec6::repeat(0.1),
            Vec6::repeat(400.0),
            1.0,
            Vec6::repeat(100.0),
        )
        .unwrap();
        assert!((p.b()[0] - 2.0 * 40f64.sqrt()).abs() < 1e-12);
        assert!((p.b()[0] - 12.6491).abs() < 1e-4);
        assert_eq!(p.kd_x()[2], 20.0);
    }

    #[test]
    fn natural_frequency_values() {
        let p = AdmittanceParams::new(Vec6::repeat(0.1), Vec6::repeat(400.0), 1.0, Vec6::zeros())
            .unwrap();
        assert!((p.natural_frequency()[0] - 63.245_553_203).abs() < 1e-6);
        let p = AdmittanceParams::new(Vec6::repeat(0.1), Vec6::repeat(0.1), 1.0, Vec6::zeros())
            .unwrap();
        assert_eq!(p.natural_frequency(), Vec6::repeat(1.0));
        let p = AdmittanceParams::new(Vec6::repeat(2.5), Vec6::repeat(2.5), 1.0, Vec6::zeros())
            .unwrap();
        assert_eq!(p.natural_frequency(), Vec6::repeat(1.0));
    }

    #[test]
    fn rejects_nonpositive_inertia() {
        assert!(
            AdmittanceParams::new(Vec6::zeros(), Vec6::repeat(1.0), 1.0, Vec6::zeros()).is_err()
        );
    }

    #[test]
    fn pure_damper_reaches_force_over_damping() {
        let p =
            AdmittanceParams::with_damping(Vec6::repeat(0.1), Vec6::zeros(), Vec6::repeat(10.0))
                .unwrap();
        let mut c = AdmittanceController::new(p, 10.0);
        for _ in 0..2000 {
            c.integrate(&e0(1.0), DT);
        }
        assert!((c.state_v()[0] - 0.1).abs() < 1e-9);
    }

    #[test]
    fn spring_settles_at_force_over_stiffness() {
        let p = AdmittanceParams::new(Vec6::repeat(0.1), Vec6::repeat(40.0), 1.0, Vec6::zeros())
            .unwrap();
        let mut c = AdmittanceController::new(p, 10.0);
        for _ in 0..5000 {
            c.integrate(&e0(1.0), DT);
        }
        assert!((c.state_x()[0] - 0.025).abs() < 1e-9);
    }

    #[test]
    fn velocity_guard_saturates() {
        let p = AdmittanceParams::with_damping(Vec6::repeat(0.1), Vec6::zeros(), Vec6::zeros())
            .unwrap();
        let mut c = AdmittanceController::new(p, 0.05);
        let mut sat = false;
        for _ in 0..100 {
            sat |= c
                .step(&Vec6::zeros(), &Vec6::zeros(), &Vec6::zeros(), &e0(5.0), DT)
                .saturated;
        }
        assert!(sat);
        assert!(c.state_v()[0] <= 0.05);
    }

    #[test]
    fn output_adds_admittance_velocity() {
        let p = AdmittanceParams::new(
            Vec6::repeat(0.1),
            Vec6::repeat(40.0),
            1.0,
            Vec6::repeat(4.0),
        )
        .unwrap();
        let mut c = AdmittanceController::new(p, 10.0);
        let out = c.step(&e0(0.01), &e0(0.0), &e0(0.002), &e0(1.0), DT);
        // from rest, damping keeps the first step below the free-mass f dt^2 / 2m
        let dx = c.state_x()[0];
        assert!(dx > 0.0 && dx < DT * DT / 0.2);
        assert!((out.u[0] - (4.0 * 0.01 + 0.002 + dx / DT)).abs() < 1e-15);
        c.reset();
        assert_eq!(*c.state_x(), Vec6::zeros());
        assert_eq!(*c.state_v(), Vec6::zeros());
    }
}
