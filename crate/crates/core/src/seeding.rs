//! Deterministic seed and stream derivation.
//!
//! Every random quantity in this crate is drawn either from a counter-based
//! hash (noise values, which must be addressable by coordinates so that
//! evaluation order and thread count cannot change them) or from a ChaCha
//! stream whose seed is derived from a run seed plus integer coordinates
//! such as generation and population index. Both paths go through the same
//! 64-bit mixer, so a single `(seed, tag, coords...)` tuple always yields
//! the same value on every platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Finalizing 64-bit mixer (the SplitMix64 output function). Bijective,
/// avalanching, and stable across platforms.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Folds a list of integer coordinates into one well-mixed 64-bit seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x3c79_ac49_2ba7_b653; // arbitrary nonzero start
    for &p in parts {
        acc = mix64(acc ^ p);
    }
    acc
}

/// ChaCha stream addressed by `(seed, coords...)`; used wherever a
/// sequential RNG is convenient (trial construction, initialization).
pub fn stream(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    let mut parts = Vec::with_capacity(coords.len() + 1);
    parts.push(seed);
    parts.extend_from_slice(coords);
    ChaCha8Rng::seed_from_u64(derive_seed(&parts))
}

/// Maps a hash to a double in `[0, 1)` using the top 53 bits.
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn mix64_is_stable_and_injective_on_small_range() {
        // Frozen value: derivations must never change between releases or
        // old run manifests stop being reproducible.
        assert_eq!(mix64(0), 0xe220a8397b1dcdaf);
        let mut seen = std::collections::HashSet::new();
        for x in 0..10_000u64 {
            assert!(seen.insert(mix64(x)));
        }
    }

    #[test]
    fn derive_seed_is_order_sensitive() {
        assert_ne!(derive_seed(&[1, 2]), derive_seed(&[2, 1]));
        assert_ne!(derive_seed(&[1]), derive_seed(&[1, 0]));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a1 = stream(7, &[3, 4]).next_u64();
        let a2 = stream(7, &[3, 4]).next_u64();
        let b = stream(7, &[3, 5]).next_u64();
        assert_eq!(a1, a2);
        assert_ne!(a1, b);
    }

    #[test]
    fn unit_f64_stays_in_half_open_interval() {
        for x in [0u64, 1, u64::MAX, 0xdead_beef] {
            let v = unit_f64(mix64(x));
            assert!((0.0..1.0).contains(&v));
        }
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
    }
}
