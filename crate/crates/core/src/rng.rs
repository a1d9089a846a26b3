//! Deterministic randomness. Every stochastic routine draws from a ChaCha8
//! stream whose seed is derived from a user-visible base seed plus a stream
//! tag, so independent concerns (initialization, shuffling, pair sampling,
//! walks) never perturb each other's draw sequences.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// ChaCha8 stream for the given seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream seed from a base seed and a stream tag.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)`.
pub fn uniform<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::from_f64(rand::Rng::random::<f64>(rng))
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform_in<T: Real>(rng: &mut ChaCha8Rng, lo: T, hi: T) -> T {
    lo + (hi - lo) * uniform::<T>(rng)
}
