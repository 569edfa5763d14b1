//! Seeded random streams.
//!
//! Every random decision in the crate flows from a 64-bit master seed. Trials
//! and sub-steps get independent ChaCha streams keyed by `(seed, stream)` so
//! that results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// A fresh generator for `seed`.
pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The generator for sub-stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used where a seed (rather than a generator) has to
/// be recorded, e.g. in trial reports.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = seed ^ index.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Named sub-streams used by the pipeline.
pub mod streams {
    pub const LEARNER: u64 = 1;
    pub const BIAS_TABLE: u64 = 2;
    pub const ROUNDING: u64 = 3;
    pub const HASH: u64 = 4;
    pub const INSTANCE: u64 = 5;
}
