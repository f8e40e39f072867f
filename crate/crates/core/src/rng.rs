//! Splittable, reproducible random streams.
//!
//! A stream is identified by a master seed and a derivation path. The
//! ChaCha20 key is a pure function of `(master_seed, path)`, so replicate
//! `r` of experiment `e` can be regenerated in isolation without replaying
//! any sibling stream.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Identifier recorded in reports so that seeds can be interpreted later.
pub const ALGORITHM_ID: &str = "chacha20/splitmix-keyed-v1";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(master_seed: u64, path: &[u64]) -> [u8; 32] {
    let mut lanes = [0u64; 4];
    for (j, lane) in lanes.iter_mut().enumerate() {
        *lane = mix64(master_seed ^ GOLDEN.wrapping_mul(j as u64 + 1));
    }
    for (depth, &idx) in path.iter().enumerate() {
        for (j, lane) in lanes.iter_mut().enumerate() {
            let salt = mix64(idx.wrapping_add(GOLDEN.wrapping_mul(j as u64 + 1)) ^ (depth as u64 + 1));
            *lane = mix64(*lane ^ salt);
        }
    }
    let mut key = [0u8; 32];
    for (chunk, lane) in key.chunks_exact_mut(8).zip(lanes) {
        chunk.copy_from_slice(&lane.to_le_bytes());
    }
    key
}

/// A single-owner random stream. Parallel work derives children instead of
/// sharing one stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self::at_path(master_seed, Vec::new())
    }

    /// Reconstructs the stream found at `path` below `master_seed`.
    pub fn at_path(master_seed: u64, path: Vec<u64>) -> Self {
        let rng = ChaCha20Rng::from_seed(derive_key(master_seed, &path));
        Self { master_seed, path, rng }
    }

    /// Child stream `index`. Does not depend on how much of `self` has been
    /// consumed.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self::at_path(self.master_seed, path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn algorithm(&self) -> &'static str {
        ALGORITHM_ID
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
