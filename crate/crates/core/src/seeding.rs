//! Deterministic seed derivation for independent campaign streams.
//!
//! A single user-facing seed fans out into per-axis and per-purpose
//! sub-seeds so that parallel campaigns stay reproducible and independent
//! of execution order.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed for stream `stream` of the base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(base).wrapping_add(splitmix64(stream.wrapping_add(1))))
}

/// Derives a sub-seed from a textual stream label.
pub fn derive_seed_labeled(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive_seed(base, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_streams_distinct_seeds() {
        let s0 = derive_seed(42, 0);
        let s1 = derive_seed(42, 1);
        let s2 = derive_seed(43, 0);
        assert_ne!(s0, s1);
        assert_ne!(s0, s2);
        // stable across calls
        assert_eq!(s0, derive_seed(42, 0));
    }

    #[test]
    fn labels_are_stable() {
        assert_eq!(
            derive_seed_labeled(7, "suite"),
            derive_seed_labeled(7, "suite")
        );
        assert_ne!(
            derive_seed_labeled(7, "suite"),
            derive_seed_labeled(7, "axis-x")
        );
    }
}
