//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose key is
//! derived from a user seed and a [`Domain`] tag, and whose 64-bit stream
//! number is an item index (replicate, resample). Draws for one item are
//! therefore independent of how many other items exist and of the order in
//! which they are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a stream; distinct domains never share a key for the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Simulated datasets; stream = replicate index.
    Simulation,
    /// Bootstrap resamples; stream = resample index.
    Bootstrap,
    /// Per-replicate bootstrap seeds inside a simulation study; stream = replicate index.
    StudyBootstrap,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Simulation => 0x5349_4d55_4c41_5445,
            Domain::Bootstrap => 0x424f_4f54_5354_5250,
            Domain::StudyBootstrap => 0x5354_5544_5942_5354,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for item `index` of `domain` under `seed`.
pub fn substream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ domain.tag()));
    rng.set_stream(index);
    rng
}

/// Derived seed for item `index`, for handing to a nested seeded procedure.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    mix64(mix64(seed ^ domain.tag()).wrapping_add(mix64(index)))
}
