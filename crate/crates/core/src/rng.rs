//! Seeded randomness shared by the sampler and the spectral estimator.
//!
//! The generator is ChaCha8 expanded from a `u64` via
//! [`SeedableRng::seed_from_u64`], which is portable across platforms. A
//! uniform variate is the top 53 bits of one `next_u64` scaled by `2^-53`, so
//! it lies in `[0, 1)` and consumes exactly one word of the stream.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Generator = ChaCha8Rng;

pub fn seeded(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seed of trial `trial` in a batch started from `base`.
#[inline]
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    base.wrapping_add(trial)
}
