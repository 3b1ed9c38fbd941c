//! Deterministic random-number streams.
//!
//! Every stochastic component draws from a ChaCha stream addressed by a
//! `(master_seed, stream)` pair: shot or trajectory k uses stream k, disorder
//! sampling uses its own stream, and so on. Streams of one master seed are
//! statistically independent, so work can be partitioned across threads in
//! any order while producing bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub use rand::RngExt;

/// Generator for stream `stream` of the family seeded by `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Independent sub-seed for stream `stream`, for handing whole seed families
/// to downstream samplers (one per time point, say).
pub fn derived_seed(master_seed: u64, stream: u64) -> u64 {
    use rand::RngExt;
    stream_rng(master_seed, stream).random()
}
