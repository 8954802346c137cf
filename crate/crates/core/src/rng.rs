//! Seeded random streams.
//!
//! Every stochastic stage draws from its own ChaCha stream derived from the
//! run seed, so changing how many numbers one stage consumes never perturbs
//! another stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams of a run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substream {
    Regions = 1,
    Scenes = 2,
    Detector = 3,
    RoiHead = 4,
    Csi = 5,
}

/// Returns the RNG for `stream` under `seed`.
pub fn substream(seed: u64, stream: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Independent stream for one item (an image, say) of a parallel stage, so
/// results do not depend on scheduling.
pub fn item_substream(seed: u64, stream: Substream, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64 + 1) << 8) | stream as u64);
    rng
}
