use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::math::{LowPassFilter, Vec6, Wrench};

/// Force/torque sensor: additive zero-mean Gaussian noise followed by a
/// first-order low-pass filter. The noise stream is seeded.
#[derive(Debug, Clone)]
pub struct FtSensor {
    noise_std: Vec6,
    filter: LowPassFilter,
    rng: ChaCha8Rng,
}

impl FtSensor {
    pub fn new(noise_std: Vec6, filter: LowPassFilter, seed: u64) -> Self {
        Self {
            noise_std,
            filter,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn from_cutoff(noise_std: Vec6, cutoff_hz: f64, period: f64, seed: u64) -> Result<Self> {
        Ok(Self::new(
            noise_std,
            LowPassFilter::from_cutoff(cutoff_hz, period)?,
            seed,
        ))
    }

    pub fn sense(&mut self, true_wrench: &Wrench) -> Wrench {
        let mut sample = true_wrench.to_vec6();
        for i in 0..6 {
            if self.noise_std[i] > 0.0 {
                let n: f64 = StandardNormal.sample(&mut self.rng);
                sample[i] += self.noise_std[i] * n;
            }
        }
        Wrench::from_vec6(&self.filter.step(&sample))
    }

    pub fn output(&self) -> Wrench {
        Wrench::from_vec6(self.filter.state())
    }

    /// Clears the filter state; the noise stream continues.
    pub fn reset(&mut self) {
        self.filter.reset();
    }
}
