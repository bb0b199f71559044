//! Splittable seeding.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is a
//! pure function of a master seed and a path of labels, e.g.
//! `(master, experiment, trial)`. Parallel trials therefore see the same
//! numbers regardless of scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Labels separating the independent consumers of one trial's randomness.
pub mod label {
    pub const ANOMALY: u64 = 0xA1;
    pub const NOISE: u64 = 0xA2;
    pub const ESTIMATOR: u64 = 0xA3;
    pub const NULL: u64 = 0xA4;
    pub const ALT: u64 = 0xA5;
    pub const RESTART: u64 = 0xA6;
    pub const GRAPH: u64 = 0xA7;
    pub const EM: u64 = 0xA8;
    pub const LATENT: u64 = 0xA9;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the 256-bit key for `(master, path...)`.
pub fn derive_key(master: u64, path: &[u64]) -> [u8; 32] {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &p in path {
        state ^= acc.rotate_left(17) ^ p.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc = splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

pub fn stream(master: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::from_seed(derive_key(master, path))
}

/// Seed for a child computation that itself takes a `u64` seed.
pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    let key = derive_key(master, path);
    u64::from_le_bytes(key[..8].try_into().unwrap())
}
