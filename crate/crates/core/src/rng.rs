//! Seeding. Every random stream is xoshiro256** seeded through SplitMix64, so
//! results are bit-reproducible across platforms and worker counts.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

pub type Rng = Xoshiro256StarStar;

/// Generator for a master seed (state expanded with SplitMix64).
pub fn rng_from_seed(seed: u64) -> Rng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

/// Seed for trial `index` of a run with master seed `master`:
/// the first SplitMix64 output for state `master ^ index`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    SplitMix64::seed_from_u64(master ^ index).next_u64()
}

/// Derives an independent master seed for a labelled sub-experiment
/// (e.g. one entry of a table, or a pilot run).
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(master);
    let base = sm.next_u64();
    SplitMix64::seed_from_u64(base ^ label.rotate_left(32)).next_u64()
}
