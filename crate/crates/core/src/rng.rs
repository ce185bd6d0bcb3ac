//! Seeding scheme shared by every randomized component.
//!
//! All streams are ChaCha8 seeded through `SeedableRng::seed_from_u64`. Child
//! seeds are derived from a master seed and an index with the SplitMix64
//! finalizer, so a batch can be generated in any order or on any number of
//! threads and still give the same instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in instance metadata (`c rng ...`).
pub const RNG_ALGORITHM: &str = "chacha8/rand-0.8/splitmix64-v1";

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child `index` of `master`: `mix64(mix64(master) ^ mix64(index))`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ mix64(index.wrapping_mul(GOLDEN)))
}

/// Seed derived along a path of indices, e.g. `(E index, trial)`.
pub fn derive_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |s, &i| derive_seed(s, i))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
