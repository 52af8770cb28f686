//! Deterministic random streams.
//!
//! Every worker owns a ChaCha8 stream keyed by the run seed and selected by
//! the worker index, so a run is reproducible whatever the thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Stream `index` of the family keyed by `seed`.
pub fn worker_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
