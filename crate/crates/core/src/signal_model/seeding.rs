//! Counter-based seed derivation.
//!
//! A scenario seed is expanded into per-trial (and per-component) sub-seeds by
//! chaining SplitMix64 finalizers over `(seed, stream, index)`. The mapping is
//! a pure function, so trial `i` always sees the same random numbers no
//! matter which worker generates it or in what order.

/// Stream tag for the additive noise component of a frame.
pub const STREAM_NOISE: u64 = 0x6e_6f69_7365;
/// Stream tag for the primary-user signal component of a frame.
pub const STREAM_SIGNAL: u64 = 0x7369_676e_616c;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for element `index` of `stream` under the root `seed`.
#[inline]
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}
