//! Seed derivation for reproducible, independent random streams.
//!
//! Every random object in this crate is a pure function of a 64-bit seed.
//! Composite samplers never share a stream with their operands: operand `i`
//! of a composite drawn with `seed` uses `split(seed, i)`, and the `i`-th
//! Monte Carlo draw under a root seed uses `split(root, i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `seed`:
/// `mix64(mix64(seed) ^ (index + 1) * GOLDEN)`.
pub fn split(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// The generator behind every draw.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn children_are_distinct() {
        let mut seen = HashSet::new();
        for root in 0..64u64 {
            assert!(seen.insert(root.wrapping_mul(GOLDEN)));
            for i in 0..64 {
                assert!(seen.insert(split(root, i)), "collision at {root}/{i}");
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(split(7, 3), split(7, 3));
        let a: u64 = rng(11).random();
        let b: u64 = rng(11).random();
        assert_eq!(a, b);
    }
}
