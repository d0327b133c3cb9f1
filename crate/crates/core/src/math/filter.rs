use super::Vec6;
use crate::error::{Error, Result};

/// First-order exponential low-pass filter over a 6-vector signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPassFilter {
    alpha: f64,
    state: Vec6,
}

impl LowPassFilter {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "low-pass alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            state: Vec6::zeros(),
        })
    }

    /// `alpha = 2 pi f_c T / (1 + 2 pi f_c T)` for cutoff `f_c` (Hz) and
    /// sample period `T` (s). A non-positive cutoff disables filtering.
    pub fn from_cutoff(cutoff_hz: f64, period: f64) -> Result<Self> {
        if cutoff_hz <= 0.0 {
            return Self::new(1.0);
        }
        let x = 2.0 * std::f64::consts::PI * cutoff_hz * period;
        Self::new(x / (1.0 + x))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn state(&self) -> &Vec6 {
        &self.state
    }

    /// `state <- (1 - alpha) state + alpha sample`; returns the new state.
    pub fn step(&mut self, sample: &Vec6) -> Vec6 {
        self.state = self.state * (1.0 - self.alpha) + sample * self.alpha;
        self.state
    }

    pub fn reset(&mut self) {
        self.state = Vec6::zeros();
    }

    pub fn reset_to(&mut self, v: Vec6) {
        self.state = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passthrough_at_alpha_one() {
        let mut f = LowPassFilter::new(1.0).unwrap();
        let s = Vec6::new(1.0, -2.0, 3.0, 0.5, 0.0, 9.0);
        assert_eq!(f.step(&s), s);
    }

    #[test]
    fn half_alpha_direct_formula() {
        let mut f = LowPassFilter::new(0.5).unwrap();
        let out = f.step(&Vec6::repeat(2.0));
        assert_eq!(out, Vec6::repeat(1.0));
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(LowPassFilter::new(0.0).is_err());
        assert!(LowPassFilter::new(1.5).is_err());
        assert!(LowPassFilter::new(f64::NAN).is_err());
    }

    #[test]
    fn cutoff_formula() {
        let f = LowPassFilter::from_cutoff(50.0, 0.002).unwrap();
        let x = 2.0 * std::f64::consts::PI * 0.1;
        assert!((f.alpha() - x / (1.0 + x)).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn constant_input_error_contracts(alpha in 0.01f64..=1.0, c in -50.0f64..50.0, k in 1usize..200) {
            let mut f = LowPassFilter::new(alpha).unwrap();
            let target = Vec6::repeat(c);
            let initial = (f.state() - target).amax();
            let mut out = Vec6::zeros();
            for _ in 0..k {
                out = f.step(&target);
            }
            let bound = (1.0 - alpha).powi(k as i32) * initial;
            proptest::prop_assert!((out - target).amax() <= bound + 1e-12 * (1.0 + c.abs()));
        }
    }
}
