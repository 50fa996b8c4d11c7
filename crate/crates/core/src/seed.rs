//! Counter-based seed derivation.
//!
//! Every unit of randomized work (a trial, a tree, a fold) gets its own RNG
//! seeded from the master seed and a path of integers, so results never depend
//! on iteration order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `master` one element at a time.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0xD1B5_4A32_D192_ED03))))
}

pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}

// Stream tags keep derived seeds for different purposes apart.
pub(crate) const TAG_CLASS: u64 = 1;
pub(crate) const TAG_SUBJECT: u64 = 2;
pub(crate) const TAG_TRIAL: u64 = 3;
pub(crate) const TAG_NOISE: u64 = 4;
pub(crate) const TAG_TREE: u64 = 5;
pub(crate) const TAG_FOLD: u64 = 6;
pub(crate) const TAG_CANDIDATE: u64 = 7;
pub(crate) const TAG_PROBE: u64 = 8;
pub(crate) const TAG_GAPS: u64 = 9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_order_matters() {
        assert_ne!(derive(1, &[2, 3]), derive(1, &[3, 2]));
        assert_ne!(derive(1, &[0]), derive(1, &[]));
        assert_eq!(derive(7, &[1, 2, 3]), derive(7, &[1, 2, 3]));
    }
}
