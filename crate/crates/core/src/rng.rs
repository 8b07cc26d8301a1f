//! Seed derivation shared by every randomized component.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One round of splitmix64. Stable across platforms and toolchains, unlike
/// `std::hash::DefaultHasher`.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub(crate) fn hash_words(words: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = mix(0x6c73_636b);
    for w in words {
        h = mix(h ^ w);
    }
    h
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a named purpose under one user seed.
pub(crate) fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    rng_from(hash_words([seed, purpose]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_order_sensitive() {
        assert_ne!(hash_words([1, 2]), hash_words([2, 1]));
        assert_eq!(hash_words([1, 2, 3]), hash_words([1, 2, 3]));
    }
}
