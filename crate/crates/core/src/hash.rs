//! PC and region hashing.

/// XOR of consecutive `bits`-wide slices of `value`.
pub fn xor_fold(mut value: u64, bits: u32) -> u64 {
    debug_assert!((1..64).contains(&bits));
    let mask = (1u64 << bits) - 1;
    let mut folded = 0;
    while value != 0 {
        folded ^= value & mask;
        value >>= bits;
    }
    folded
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_slices() {
        assert_eq!(xor_fold(0, 13), 0);
        assert_eq!(xor_fold(0x1FFF, 13), 0x1FFF);
        assert_eq!(xor_fold((0x5 << 13) | 0x3, 13), 0x6);
        assert!(xor_fold(u64::MAX, 10) < 1024);
    }

    #[test]
    fn nearby_pcs_spread() {
        // Word-aligned neighbouring PCs must not collide.
        let hashes: std::collections::HashSet<u64> = (0..64u64).map(|i| xor_fold(0x40_0000 + 4 * i, 13)).collect();
        assert_eq!(hashes.len(), 64);
    }
}
