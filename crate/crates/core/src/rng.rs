//! Reproducible random number state.
//!
//! Every sampler takes an explicit `RngState`; there is no global generator.
//! A state is addressed by `(seed, stream)` and reproduces its sample stream
//! bit-for-bit. Independent substreams for parallel work are derived with
//! [`RngState::substream`].

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Derives an independent stream with the same seed. Used to give each
    /// Monte Carlo sample or chain its own generator so that results do not
    /// depend on scheduling.
    pub fn substream(&self, index: u64) -> Self {
        let child = mix64(
            self.stream
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(index)
                .wrapping_add(1),
        );
        Self::with_stream(self.seed, child)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}
