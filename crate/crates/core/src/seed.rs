//! Counter-based seed derivation.
//!
//! Every stochastic stage draws its seed as `derive(master, stream, counter)`,
//! a SplitMix64 finalizer applied to the master seed mixed with a stream tag
//! and a counter. Stages are therefore reproducible in isolation: re-running
//! one stage with the same master seed reproduces its inputs exactly, no
//! matter which stages ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the pipeline stages. Values are part of the reproducibility
/// contract and must never be renumbered.
pub mod stream {
    pub const DOE: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const FIT: u64 = 3;
    pub const SOBOL: u64 = 4;
    pub const OPTIMIZE: u64 = 5;
    pub const CRN: u64 = 6;
    pub const INNER: u64 = 7;
    pub const POSTERIOR: u64 = 8;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, stream: u64, counter: u64) -> u64 {
    let a = splitmix64(master ^ splitmix64(stream));
    splitmix64(a ^ splitmix64(counter.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Hash of a point's exact bit pattern.
pub fn hash_point(x: &[f64]) -> u64 {
    x.iter()
        .fold(0xCBF2_9CE4_8422_2325_u64, |h, v| splitmix64(h ^ v.to_bits()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
