//! Seeded random streams.
//!
//! Replicate `i` of a run with root seed `r` draws from
//! `ChaCha8Rng::seed_from_u64(splitmix64(r ^ splitmix64(i)))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index` under `root`.
pub fn replicate_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replicate_stream(root: u64, index: u64) -> StreamRng {
    stream(replicate_seed(root, index))
}
