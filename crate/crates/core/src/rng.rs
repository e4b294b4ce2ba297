//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream identified by a
//! [`StreamKey`]. The key is hashed into a ChaCha key, so two streams with
//! different keys are independent and a stream can be reconstructed from its
//! key alone, regardless of which thread or in which order it is requested.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type StreamRng = ChaCha12Rng;

/// What a stream is used for. Part of the key so that, e.g., the gate draw and
/// the herald draw at the same `(layer, index)` never share randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Gate = 1,
    Herald = 2,
    Sampler = 3,
    MonteCarlo = 4,
    Instance = 5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub seed: u64,
    pub realization: u64,
    pub layer: u64,
    pub index: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(seed: u64, realization: u64, layer: u64, index: u64, purpose: Purpose) -> Self {
        Self {
            seed,
            realization,
            layer,
            index,
            purpose,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let words = [
            self.seed,
            self.realization,
            self.layer,
            self.index,
            self.purpose as u64,
        ];
        let mut state = 0x6a09_e667_f3bc_c909_u64;
        for w in words {
            state = splitmix64(state ^ w);
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }
}

/// Derives a child seed from a parent seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ 0x9e37_79b9_7f4a_7c15) ^ index)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
