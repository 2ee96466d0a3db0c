//! Deterministic, splittable random number generation.
//!
//! Every stochastic routine in the crate takes a `&mut Rng`; identical seeds
//! produce identical sample sequences. Parallel work splits the generator by
//! child id instead of sharing one stream, so results do not depend on
//! scheduling.

use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// SplitMix64 finalizer; used to derive independent child seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded random stream with deterministic splitting.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha12Rng::seed_from_u64(mix(seed)),
        }
    }

    /// Derives an independent stream for child `child_id`. Splitting is a
    /// pure function of `(seed, child_id)` and does not advance `self`.
    pub fn split(&self, child_id: u64) -> Self {
        let child_seed = mix(self.seed ^ mix(child_id.wrapping_add(1)));
        Rng::from_seed(child_seed)
    }

    /// One draw from N(0, 1).
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// A `dim`-vector of independent N(0, 1) draws.
    pub fn standard_normal_vec(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.standard_normal()).collect()
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw from `{0, 1, ..., n-1}`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}
