//! Counter-based random streams.
//!
//! Every unit of parallel work (a pool path, a predictive replicate) owns a
//! stream derived from `(master_seed, domain, index)`. The ChaCha key comes
//! from the master seed and the domain; the index selects the ChaCha stream.
//! Results therefore do not depend on how work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream domains used by the engine. Distinct domains give unrelated keys
/// under the same master seed.
pub mod domain {
    pub const SIMULATE: u64 = 0x5349_4d55;
    pub const ABC_POOL: u64 = 0x4142_4350;
    pub const PREDICTIVE: u64 = 0x5052_4544;
    pub const OBSERVED: u64 = 0x4f42_5356;
}

#[derive(Debug, Clone)]
pub struct RandomStream(ChaCha8Rng);

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    /// Single stream from a seed; equivalent to `derive(seed, 0, 0)`.
    pub fn from_seed(seed: u64) -> Self {
        Self::derive(seed, 0, 0)
    }

    pub fn derive(master_seed: u64, domain: u64, index: u64) -> Self {
        let mut state = master_seed ^ domain.rotate_left(32);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self(rng)
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            let u = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Uniform draw on [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer on `0..=upper`.
    pub fn below_inclusive(&mut self, upper: u64) -> u64 {
        if upper == u64::MAX {
            return self.0.next_u64();
        }
        let range = upper + 1;
        // Lemire's nearly divisionless rejection.
        loop {
            let x = self.0.next_u64();
            let m = (x as u128) * (range as u128);
            let low = m as u64;
            if low >= range || low >= range.wrapping_neg() % range {
                return (m >> 64) as u64;
            }
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}
