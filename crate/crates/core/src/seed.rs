//! Deterministic derivation of independent RNG streams.
//!
//! Every random quantity in a run (bootstrap draws, split candidates, OOB
//! permutations, column permutations, replicate data) is drawn from its own
//! stream whose seed is a hash of the master seed and a path of indices. This
//! keeps results independent of thread scheduling and lets any single stream
//! be reproduced in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash `master` and `path` into a new seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, path))
}
