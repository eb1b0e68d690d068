//! Seed derivation helpers.
//!
//! All randomness in the crate flows through `ChaCha12Rng` seeded from
//! `u64` keys. Sub-streams (per class, per sample, per draw) are derived
//! by mixing the base seed with tag and index values so that adding or
//! reordering consumers never perturbs unrelated streams.

/// SplitMix64 finalizer. Combines two words into a well-mixed seed.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
