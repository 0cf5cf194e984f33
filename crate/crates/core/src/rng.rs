//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator keyed by a 64-bit seed mixed
//! from a root seed and a tuple of stream coordinates, so results do not
//! depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `root`.
pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(root), |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn stream(root: u64, parts: &[u64]) -> Stream {
    Stream::seed_from_u64(derive_seed(root, parts))
}
