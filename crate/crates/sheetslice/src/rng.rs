//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator keyed by a 64-bit seed and a
//! 64-bit stream id. Seeds for sub-tasks are derived from the master seed
//! by SplitMix64 mixing, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a label.
pub fn derive(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for trial `index` of the experiment seeded with `seed`.
pub fn trial(seed: u64, index: u64) -> ChaCha8Rng {
    stream(derive(seed, 0x7472_6961_6c00), index)
}
