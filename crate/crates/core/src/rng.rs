//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit `u64` seed. Generators are
//! ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through `seed_from_u64`.
//! Independent sub-streams of a master seed are derived with
//! [`sub_seed`], a SplitMix64 finalizer over `master` and the stream index,
//! so trial `k` of an experiment always sees the same draws regardless of
//! how many other trials run or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` under `master`.
pub fn sub_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sub_rng(master: u64, stream: u64) -> SimRng {
    rng_from_seed(sub_seed(master, stream))
}
