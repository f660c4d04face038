//! Deterministic seed derivation.
//!
//! Child seeds are derived with the SplitMix64 finalizer:
//!
//! ```text
//! mix(a, b) = fmix(a ^ fmix(b + 0x9E3779B97F4A7C15))
//! fmix(z)   = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!             z ^= z >> 27; z *= 0x94D049BB133111EB;
//!             z ^ (z >> 31)
//! ```
//!
//! An experiment derives `grid_seed = mix(master_seed, grid_index)` and
//! `trial_seed = mix(grid_seed, trial_index)`, so any row can be recomputed
//! from the master seed and its indices alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn fmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(a: u64, b: u64) -> u64 {
    fmix(a ^ fmix(b.wrapping_add(GOLDEN_GAMMA)))
}

pub fn grid_seed(master_seed: u64, grid_index: usize) -> u64 {
    mix(master_seed, grid_index as u64)
}

pub fn trial_seed(grid_seed: u64, trial_index: usize) -> u64 {
    mix(grid_seed, trial_index as u64)
}

/// Seeds the crate-wide random stream type.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
