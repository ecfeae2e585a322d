//! Ornstein-Uhlenbeck exploration noise: temporally correlated,
//! mean-reverting to zero.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    state: Vec<f64>,
    /// Mean-reversion rate.
    theta: f64,
    /// Current volatility.
    sigma: f64,
    /// Multiplicative volatility decay applied per episode.
    sigma_decay: f64,
}

impl OuNoise {
    pub fn new(dim: usize, theta: f64, sigma: f64, sigma_decay: f64) -> Self {
        Self { state: vec![0.0; dim], theta, sigma, sigma_decay }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        self.sigma = sigma;
    }

    /// Advances the process one step and returns the new sample.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> &[f64] {
        for x in self.state.iter_mut() {
            *x += self.theta * (0.0 - *x) + self.sigma * gaussian(rng);
        }
        &self.state
    }

    /// Volatility decay plus state reset at an episode boundary.
    pub fn end_episode(&mut self) {
        self.sigma *= self.sigma_decay;
        self.state.iter_mut().for_each(|x| *x = 0.0);
    }
}

/// Standard normal draw via Box-Muller.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_volatility_stays_at_zero() {
        let mut noise = OuNoise::new(4, 0.15, 0.0, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert!(noise.step(&mut rng).iter().all(|x| *x == 0.0));
        }
    }

    #[test]
    fn fixed_seed_reproduces_sequence() {
        let sample = |seed: u64| -> Vec<f64> {
            let mut noise = OuNoise::new(3, 0.15, 0.2, 0.995);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            (0..20).flat_map(|_| noise.step(&mut rng).to_vec()).collect()
        };
        assert_eq!(sample(5), sample(5));
        assert_ne!(sample(5), sample(6));
    }

    #[test]
    fn long_run_mean_reverts_to_zero() {
        let mut noise = OuNoise::new(1, 0.15, 0.2, 1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += noise.step(&mut rng)[0];
        }
        let mean = sum / draws as f64;
        assert!(mean.abs() < 0.01, "OU mean {mean}");
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let g = gaussian(&mut rng);
            sum += g;
            sq += g * g;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn sigma_decays_per_episode() {
        let mut noise = OuNoise::new(1, 0.15, 0.2, 0.995);
        noise.end_episode();
        assert!((noise.sigma() - 0.199).abs() < 1e-12);
    }
}
