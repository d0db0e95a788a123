//! Deterministic randomness seam.
//!
//! Every stochastic routine takes an explicit 64-bit seed and derives its
//! generators through [`SeedSplitter`], a counter-based scheme (ChaCha streams)
//! so that independent purposes and parallel replications never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Splits one master seed into independent, reproducible streams.
#[derive(Debug, Clone, Copy)]
pub struct SeedSplitter {
    seed: u64,
}

impl SeedSplitter {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for the given purpose tag. Equal `(seed, tag)` pairs yield
    /// bit-identical streams; distinct tags are independent counters.
    pub fn stream(&self, tag: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(tag);
        rng
    }

    /// A derived splitter, for nesting (e.g. one per replication).
    pub fn child(&self, tag: u64) -> SeedSplitter {
        // SplitMix64 step keeps children independent of sibling tags.
        let mut z = self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        SeedSplitter::new(z ^ (z >> 31))
    }
}
