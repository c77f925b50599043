//! Deterministic, platform-independent seed derivation.
//!
//! Every randomized stage derives its own RNG stream from the master seed and
//! a list of context parts (dataset id, stage name, sample index, ...). Two
//! stages never share a stream, so parallel execution cannot change results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the UTF-8 bytes of a string part.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; the fixed 64-bit mixing function used everywhere.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and ordered context parts.
///
/// The rotate-then-add combine is deliberately asymmetric so that swapping
/// the accumulator with a part changes the result.
pub fn derive(master: u64, parts: &[u64]) -> u64 {
    let mut h = mix(master);
    for p in parts {
        h = mix(h.rotate_left(23).wrapping_add(mix(*p)));
    }
    h
}

/// ChaCha stream for a derived seed. ChaCha output is identical on every
/// platform, unlike hash-based std RNG state.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_is_order_sensitive() {
        assert_ne!(derive(1, &[2, 3]), derive(1, &[3, 2]));
        assert_ne!(derive(1, &[2]), derive(2, &[1]));
    }

    #[test]
    fn derive_is_stable() {
        // Frozen values: a change here silently breaks every stored report.
        assert_eq!(mix(0), 0xe220a8397b1dcdaf);
        assert_eq!(hash_str("lime"), 13787090406293869148);
        assert_eq!(derive(42, &[hash_str("split")]), derive(42, &[hash_str("split")]));
    }

    #[test]
    fn stream_is_reproducible() {
        let a: f64 = stream(7).random();
        let b: f64 = stream(7).random();
        assert_eq!(a, b);
    }
}
