//! Deterministic seed derivation.
//!
//! Every random stage takes its seed from the run seed through these helpers
//! so any stage (or any single bootstrap replicate) can be reproduced alone.

/// Golden-ratio increment used to spread replicate indices.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed for bootstrap replicate `k`: `base ^ (k * GOLDEN_GAMMA)`.
pub fn replicate_seed(base: u64, k: usize) -> u64 {
    base ^ (k as u64).wrapping_mul(GOLDEN_GAMMA)
}

/// Seed for a named pipeline stage, mixed with SplitMix64.
pub fn stage_seed(base: u64, stage: &str, index: u64) -> u64 {
    let mut h = base;
    for b in stage.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
