//! Seeded random streams.
//!
//! Every realization draws from its own ChaCha8 stream: the generator is seeded
//! from the master seed and the realization index selects the stream. Distinct
//! purposes (for example the fresh continuation of a snapshot) use a master seed
//! derived with [`derive_seed`], so no two purposes share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// The rng for realization `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a purpose label into a master seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
