//! Deterministic random-number plumbing.
//!
//! Every stochastic draw in the simulator flows through a [`ChaCha8Rng`]
//! seeded from a value derived here. Seeds for sub-tasks (a Monte-Carlo
//! trial, a column latch event, an ADC comparator) are derived from the run
//! seed plus the task's integer coordinates with a fixed mixing function, so
//! results are independent of evaluation order and of how work is sliced
//! across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 mixing permutation.
///
/// Chosen because it is a well-studied, stable bijection on `u64`; unlike the
/// standard library's `DefaultHasher` it is specified and will never change
/// between releases or processes.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and the integer coordinates of a
/// sub-task (point index, trial index, column index, ...).
///
/// The derivation is a chained splitmix64 absorb, so distinct coordinate
/// tuples yield statistically independent streams and the same tuple always
/// yields the same stream.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(base);
    for &p in parts {
        acc = splitmix64(acc ^ splitmix64(p));
    }
    acc
}

/// Builds the crate's standard RNG from a derived seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
