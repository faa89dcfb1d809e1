//! Deterministic seeding.
//!
//! Every random draw in the crate flows from a SplitMix64 sequence (state
//! increment `0x9E3779B97F4A7C15`, output mix multipliers `0xBF58476D1CE4E5B9`
//! and `0x94D049BB133111EB`, shifts 30/27/31). A per-utterance seed is
//!
//! ```text
//! h   = FNV-1a-64(utf8(utterance_id))
//! s1  = splitmix_next(global_seed ^ h)
//! seed = splitmix_next(s1 ^ copy_index)
//! ```
//!
//! where `splitmix_next(x)` is the first output of a SplitMix64 generator
//! whose state is `x`. Uniform reals are `lo + (hi - lo) * (next_u64 >> 11) * 2^-53`.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub struct SeedRng(SplitMix64);

impl SeedRng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `0..=max` (modulo reduction).
    pub fn up_to(&mut self, max: usize) -> usize {
        (self.next_u64() % (max as u64 + 1)) as usize
    }
}

pub fn mix(x: u64) -> u64 {
    SeedRng::new(x).next_u64()
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub fn utterance_seed(global_seed: u64, utterance_id: &str, copy_index: u64) -> u64 {
    mix(mix(global_seed ^ fnv1a(utterance_id.as_bytes())) ^ copy_index)
}

/// Seed for one frame when factors are drawn per frame.
pub fn frame_seed(utterance_seed: u64, frame_index: usize) -> u64 {
    mix(utterance_seed ^ (frame_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
