//! Counter-based random streams.
//!
//! Every sampler iteration owns the ChaCha stream keyed by `(seed, iteration)`,
//! so the realised sample does not depend on how iterations are scheduled
//! across threads. Auxiliary streams (Poisson paths, replicate seeds) are
//! forked off a parent stream deterministically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Stream number `index` of the generator family keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Independent child generator seeded from the next output of `parent`.
pub fn fork(parent: &mut StreamRng) -> StreamRng {
    ChaCha8Rng::from_rng(parent)
}

/// Mixes a base seed with two labels (splitmix64 finaliser).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
