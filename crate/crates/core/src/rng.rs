//! Reproducible random-number streams.
//!
//! All randomness in this crate flows through [`RngStream`], a `(seed,
//! stream-id)` pair backed by ChaCha8. The same pair always reproduces the
//! same draw sequence, and distinct stream ids give statistically
//! independent streams, so replications and worker threads can each own a
//! stream without coordination.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Instantiate the generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Instantiate the generator at a saved word position (checkpoint resume).
    pub fn rng_at(&self, word_pos: u128) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_word_pos(word_pos);
        rng
    }

    /// Derive a child stream for an independent unit of work.
    ///
    /// The derivation hashes `(stream, tag)` so that any two distinct tags
    /// (or distinct parents) land on different ChaCha streams with
    /// overwhelming probability, while the seed stays shared.
    pub fn substream(&self, tag: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(tag)),
        }
    }
}

/// SplitMix64 finalizer; used only to spread substream tags over the u64
/// stream space.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
