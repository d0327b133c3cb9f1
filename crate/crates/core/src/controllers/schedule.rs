use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{map_range, vec6_from, Vec6};

/// Per-axis `[base - range, base + range]` interval onto which a gain
/// action in `[-1, 1]` is mapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSchedule {
    pub base: [f64; 6],
    pub range: [f64; 6],
}

impl GainSchedule {
    pub fn uniform(base: f64, range: f64) -> Self {
        Self {
            base: [base; 6],
            range: [range; 6],
        }
    }

    pub fn split(lin_base: f64, lin_range: f64, rot_base: f64, rot_range: f64) -> Self {
        Self {
            base: [lin_base, lin_base, lin_base, rot_base, rot_base, rot_base],
            range: [
                lin_range, lin_range, lin_range, rot_range, rot_range, rot_range,
            ],
        }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        for i in 0..6 {
            if !(self.range[i] >= 0.0) || !self.base[i].is_finite() || !self.range[i].is_finite() {
                return Err(Error::Config(format!(
                    "{what}: range must be finite and >= 0 (axis {i}: base {}, range {})",
                    self.base[i], self.range[i]
                )));
            }
        }
        Ok(())
    }

    /// Lowest value any action can produce, per axis.
    pub fn lower(&self) -> Vec6 {
        vec6_from(&self.base) - vec6_from(&self.range)
    }

    pub fn map(&self, a: &Vec6) -> Vec6 {
        Vec6::from_fn(|i, _| map_range(a[i], self.base[i], self.range[i]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_range_rejected() {
        let mut s = GainSchedule::uniform(1.0, 0.5);
        assert!(s.validate("kp").is_ok());
        s.range[3] = -0.1;
        assert!(s.validate("kp").is_err());
    }

    #[test]
    fn zero_action_gives_base() {
        let s = GainSchedule::split(10.0, 5.0, 2.0, 1.0);
        let g = s.map(&Vec6::zeros());
        assert_eq!(g, Vec6::new(10.0, 10.0, 10.0, 2.0, 2.0, 2.0));
    }
}
