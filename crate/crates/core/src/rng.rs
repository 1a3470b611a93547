//! Splittable deterministic random streams.
//!
//! Every stochastic operation takes an explicit [`RngStream`]. A stream is an
//! immutable key; `child(label)` derives an independent sub-stream, so the
//! randomness consumed by one task never depends on how many draws a sibling
//! task made. This is what makes parallel candidate evaluation bit-identical
//! to sequential evaluation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; the standard 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Immutable key into a lazily materialized random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { key: mix(seed) }
    }

    /// Derive the `label`-th independent sub-stream.
    pub fn child(&self, label: u64) -> Self {
        RngStream {
            key: mix(self.key ^ mix(label.wrapping_add(0x1234_5678_9abc_def0))),
        }
    }

    /// Materialize the stream as a concrete RNG.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    /// Raw 64-bit value at `counter`, without materializing an RNG.
    /// Used by content-addressed sampling.
    pub fn value_at(&self, counter: u64) -> u64 {
        mix(self.key ^ mix(counter))
    }
}
