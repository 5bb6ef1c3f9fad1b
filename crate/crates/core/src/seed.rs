//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator whose seed comes
//! from [`derive_seed`]. Changing either piece changes every published
//! number, so the pair is versioned through [`RNG_ALGORITHM`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const RNG_ALGORITHM: &str = "chacha8+splitmix64/v1";

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th sub-stream of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}
