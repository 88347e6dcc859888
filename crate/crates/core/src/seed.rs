//! Sub-seed derivation.
//!
//! Every random stream in the crate is keyed by a master seed plus a short
//! tag path, mixed with SplitMix64. Output files record the master seed, and
//! this module is the whole mapping from it to every stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 finalization step.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `tags` into `master`, one mixing round per tag.
pub fn derive(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix64(master), |acc, &t| mix64(acc ^ mix64(t)))
}

pub fn rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, tags))
}

/// Stream tags, kept distinct so streams never alias.
pub mod tag {
    pub const SAMPLE: u64 = 1;
    pub const STORE: u64 = 2;
    pub const RETRIEVE: u64 = 3;
    pub const PERTURB: u64 = 4;
    pub const DAMAGE: u64 = 5;
    pub const GRAPH: u64 = 6;
    pub const GRID: u64 = 7;
    pub const PERMUTATION: u64 = 8;
    pub const DECISION: u64 = 9;
    pub const ACTIVATION: u64 = 10;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable_and_tag_sensitive() {
        assert_eq!(derive(7, &[1, 2]), derive(7, &[1, 2]));
        assert_ne!(derive(7, &[1, 2]), derive(7, &[2, 1]));
        assert_ne!(derive(7, &[1]), derive(8, &[1]));
        // pinned so that recorded seeds stay meaningful across releases
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    }
}
