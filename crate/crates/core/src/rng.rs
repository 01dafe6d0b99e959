//! Keyed random streams.
//!
//! Every random draw in a simulation is addressed by a master seed plus a
//! [`StreamKey`]. The generator for a key is rebuilt from scratch whenever it
//! is needed, so the values a client sees never depend on how many threads
//! ran or in which order clients were scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a draw is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Start-of-round control resampling.
    Control,
    /// Per-iteration local stochastic gradients.
    Local,
    /// Similarity partitioning of a dataset.
    Partition,
    /// Synthetic dataset generation.
    Dataset,
    /// Seeds handed to independent sub-runs (grid cells, compare runs).
    SubRun,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Control => 0x01,
            Purpose::Local => 0x02,
            Purpose::Partition => 0x03,
            Purpose::Dataset => 0x04,
            Purpose::SubRun => 0x05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub client: u64,
    pub round: u64,
    pub iteration: u64,
    pub purpose: Purpose,
}

impl StreamKey {
    pub fn new(purpose: Purpose, client: usize, round: usize, iteration: usize) -> Self {
        Self {
            client: client as u64,
            round: round as u64,
            iteration: iteration as u64,
            purpose,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub key: StreamKey,
}

impl RngStream {
    pub fn new(seed: u64, key: StreamKey) -> Self {
        Self { seed, key }
    }

    pub fn keyed(seed: u64, purpose: Purpose, client: usize, round: usize, iteration: usize) -> Self {
        Self::new(seed, StreamKey::new(purpose, client, round, iteration))
    }

    /// A fresh generator positioned at the start of this key's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let k0 = splitmix64(self.seed);
        let k1 = splitmix64(k0 ^ self.key.purpose.tag());
        let k2 = splitmix64(k1 ^ self.key.client);
        let k3 = splitmix64(k2 ^ self.key.round);
        let mut bytes = [0u8; 32];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip([k0, k1, k2, k3]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(self.key.iteration);
        rng
    }
}

/// Derives an independent 64-bit seed for sub-run `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ Purpose::SubRun.tag().rotate_left(56)) ^ index)
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
