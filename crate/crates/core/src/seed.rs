//! Seed derivation. Every random draw in the crate is keyed by a
//! `(stream, index)` pair hashed through SplitMix64, so that trajectories are
//! reproducible and draws for distinct indices are independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 output step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a child seed from a stream seed and an index.
pub fn derive(stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(stream) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// A deterministic RNG for `(stream, index)`.
pub fn rng(stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(stream, index))
}
