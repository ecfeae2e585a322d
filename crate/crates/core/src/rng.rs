//! Named, independent random substreams derived from one master seed.
//!
//! Changing the draws of one component (say, arrivals) must not perturb
//! another (say, network init), so every consumer asks for its own stream
//! by name. The same (master seed, name) pair always yields the same
//! stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Spawns independent RNG streams from a master seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedSpawner {
    master: u64,
}

impl SeedSpawner {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    /// Deterministic stream for a named component.
    pub fn stream(&self, name: &str) -> ChaCha12Rng {
        let mut x = self.master ^ fnv1a(name.as_bytes());
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
