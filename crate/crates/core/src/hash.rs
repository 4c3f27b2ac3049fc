//! Stateless keyed mixing used to materialize random signs and coordinate
//! mappings on demand.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pseudorandom 64-bit word keyed by `(seed, a, b)`.
#[inline]
pub fn keyed_hash(seed: u64, a: u64, b: u64) -> u64 {
    let z = mix64(seed.wrapping_add(GOLDEN));
    let z = mix64(z ^ a.wrapping_mul(GOLDEN));
    mix64(z ^ b.wrapping_add(0x632B_E59B_D9B4_E019))
}

/// Maps a hash onto `[0, width)` without modulo bias beyond 2^-64.
#[inline]
pub fn bucket(hash: u64, width: u32) -> u32 {
    ((u128::from(hash) * u128::from(width)) >> 64) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_is_in_range_and_roughly_uniform() {
        let mut counts = [0usize; 8];
        for i in 0..80_000u64 {
            counts[bucket(keyed_hash(7, 0, i), 8) as usize] += 1;
        }
        for c in counts {
            assert!((9_000..11_000).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn keys_are_not_symmetric() {
        assert_ne!(keyed_hash(1, 2, 3), keyed_hash(1, 3, 2));
        assert_ne!(keyed_hash(1, 2, 3), keyed_hash(2, 2, 3));
    }
}
