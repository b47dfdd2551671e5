//! Named, independent random streams derived from a single seed.
//!
//! Each stream is a ChaCha20 generator keyed by the seed and positioned on a
//! distinct stream id, so drawing from one never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream selectors used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Design,
    Signal,
    Noise,
    Haar,
    Prior,
    Expectation,
    Init,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Design => 1,
            Stream::Signal => 2,
            Stream::Noise => 3,
            Stream::Haar => 4,
            Stream::Prior => 5,
            Stream::Expectation => 6,
            Stream::Init => 7,
        }
    }
}

/// Returns the generator for `stream` under `seed`.
pub fn stream(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Derives the seed of trial `index` from a base seed (SplitMix64 finalizer).
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
