//! Portable seeded randomness.
//!
//! All randomized components draw from ChaCha streams seeded through
//! `SeedableRng::seed_from_u64` and sample integers with [`uniform_below`],
//! a plain rejection sampler over `next_u64`. Both are fully specified, so a
//! seed reproduces the same draws on every platform and in any
//! reimplementation that follows the same recipe.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

/// Generator for simulation batches: stream `batch` of the ChaCha20 key
/// derived from `seed`.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Generator for schedules and test corpora.
pub fn small_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` by rejection on the top of the `u64` range.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0, "empty range");
    // largest multiple of bound that fits; draws at or above it are rejected
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Uniform integer in `lo..=hi`.
pub fn uniform_inclusive<R: RngCore + ?Sized>(rng: &mut R, lo: u64, hi: u64) -> u64 {
    assert!(lo <= hi);
    match (hi - lo).checked_add(1) {
        Some(width) => lo + uniform_below(rng, width),
        None => rng.next_u64(),
    }
}
