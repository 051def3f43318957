//! Reproducible random substreams.
//!
//! A stream is identified by `(master_seed, substream_id)` and always yields the
//! same sequence, on every platform and under any thread schedule. Parallel
//! work derives one child stream per work item with [`RngStream::child`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator every sampler draws from.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub substream_id: u64,
}

impl RngStream {
    pub const fn new(master_seed: u64, substream_id: u64) -> Self {
        Self { master_seed, substream_id }
    }

    pub fn from_seed(master_seed: u64) -> Self {
        Self::new(master_seed, 0)
    }

    /// A new generator positioned at the start of this stream.
    pub fn rng(&self) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.substream_id);
        rng
    }

    /// Deterministic child stream keyed by `key`.
    pub fn child(&self, key: u64) -> Self {
        Self::new(self.master_seed, splitmix64(self.substream_id ^ splitmix64(key)))
    }

    /// Child keyed by a sequence of indices (e.g. grid index, trial index).
    pub fn path(&self, keys: &[u64]) -> Self {
        keys.iter().fold(*self, |s, &k| s.child(k))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
