//! Seeded, splittable random streams.
//!
//! Every stochastic operation in this crate draws from an [`RngStream`], a
//! ChaCha8 counter-based generator addressed by a `(seed, stream)` pair.
//! ChaCha is a pure bit-manipulation stream cipher, so identical pairs yield
//! identical bit and real sequences on every platform and on every run.
//! Batch drivers derive one stream per task ordinal (`stream = task index`)
//! so results are invariant to scheduling order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

/// A reproducible random stream identified by `(seed, stream)`.
///
/// A stream must not be shared between concurrent tasks; derive one stream
/// per task with [`RngStream::substream`] instead.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

/// Identifying coordinates of a stream, for run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    /// Open the stream at `(seed, stream)`, positioned at its first draw.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// The stream for task `ordinal` under the same master seed.
    pub fn substream(&self, ordinal: u64) -> Self {
        Self::new(self.seed, ordinal)
    }

    pub fn id(&self) -> StreamId {
        StreamId {
            seed: self.seed,
            stream: self.stream,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        // (u >> 11) spans [0, 2^53); scale by 2^-53.
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli draw: `true` with probability `p`.
    ///
    /// `p = 0` never fires and `p = 1` always fires, exactly.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        debug_assert!((0.0..=1.0).contains(&p));
        if p >= 1.0 {
            return true;
        }
        self.next_f64() < p
    }

    /// A fair bit.
    pub fn fair_bit(&mut self) -> u8 {
        (self.next_u64() >> 63) as u8
    }
}
