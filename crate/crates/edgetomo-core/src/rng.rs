//! Seedable deterministic pseudo-random streams.
//!
//! Every randomized construction in this crate (perturbation phases, probe
//! points for exactness checks) draws from this mixer so that a given seed
//! reproduces bit-identical results on every platform and build.

/// Advances the state and returns a well-mixed 64-bit word.
pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw from `[0, 1)` with full 53-bit mantissa resolution.
pub(crate) fn uniform01(state: &mut u64) -> f64 {
    (splitmix64(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
