//! Counter-based random substreams.
//!
//! Every (seed, trial, device) triple owns a fixed window of the ChaCha8
//! keystream: the seed selects the key, the trial selects the stream and the
//! device selects the word offset. Draws therefore never depend on the order
//! in which trials or devices are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Keystream words reserved per device. A device draws at most a handful of
/// `u64`s; the rest of the window is padding.
pub const WORDS_PER_DEVICE: u128 = 32;

#[derive(Debug, Clone)]
pub struct TrialStreams {
    base: ChaCha8Rng,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(seed);
        base.set_stream(trial);
        TrialStreams { base }
    }

    pub fn device(&self, device: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_word_pos(device as u128 * WORDS_PER_DEVICE);
        rng
    }
}
