//! Seeded random streams.
//!
//! Every trial and every agent owns one [`RandomStream`]. Stream seeds are
//! derived with the SplitMix64 finalizer so that the bits drawn by trial `t`,
//! agent `i` depend only on `(base_seed, t, i)` and never on scheduling or on
//! how many other agents exist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Name recorded in run metadata; changing the generator changes every result.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9) seeded via SplitMix64";

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a parent seed with a child index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Seed of trial `t` under `base_seed`.
pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    derive_seed(base_seed, trial)
}

/// Seed of agent `i` inside a trial. The single-center estimator uses agent 0.
pub fn agent_seed(trial_seed: u64, agent: u64) -> u64 {
    derive_seed(trial_seed, agent)
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha20Rng,
}

impl RandomStream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// `true` with probability `prob`.
    pub fn bernoulli(&mut self, prob: f64) -> bool {
        self.uniform() < prob
    }
}
