//! Seeded randomness.
//!
//! Every random draw in the simulator goes through [`SimRng`], a ChaCha8
//! stream keyed by a 64-bit seed. ChaCha output is specified independently of
//! platform and pointer width, so equal seeds give equal streams everywhere.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn from_seed(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Child generator for a sub-task, e.g. one agent's key session.
    ///
    /// The child seed is drawn from this stream, so the parent advances by
    /// one `u64` regardless of how much the child consumes.
    pub fn fork(&mut self) -> SimRng {
        SimRng::from_seed(self.0.next_u64())
    }
}

impl RngCore for SimRng {
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

/// SplitMix64 finalizer.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`:
///
/// ```text
/// mix(master, i) = splitmix64(master + (i + 1) * 0x9E3779B97F4A7C15)   (wrapping u64)
/// ```
///
/// This is the SplitMix64 output for state `master` after `i + 1` steps, so
/// trials get distinct, well-spread seeds independent of scheduling order.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    avalanche(master_seed.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
