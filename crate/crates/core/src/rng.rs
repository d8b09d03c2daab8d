//! Deterministic, splittable randomness.
//!
//! Public randomness shared by Alice and Bob is modelled as a single `u64`
//! seed. Every random object in a run (mask matrix, permutations, stream
//! orders, trimming, instance sampling) gets its own generator keyed by
//! `(seed, index, role)`, so any two parties that agree on the seed draw
//! identical samples without coordinating.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tag separating independent random streams that share a seed and index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Role {
    Mask = 1,
    RowPermutation = 2,
    ColumnPermutation = 3,
    AliceOrder = 4,
    BobOrder = 5,
    Trim = 6,
    Algorithm = 7,
    Instance = 8,
    Trial = 9,
    Stream = 10,
}

/// Generator fully determined by `(seed, index, role)`.
pub fn derive_rng(seed: u64, index: u64, role: Role) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&(role as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A fresh `u64` seed derived from `(seed, index, role)`.
pub fn derive_seed(seed: u64, index: u64, role: Role) -> u64 {
    derive_rng(seed, index, role).next_u64()
}

/// SplitMix64 finalizer, used where a stateless keyed hash is needed.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
