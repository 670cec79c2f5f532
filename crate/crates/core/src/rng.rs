//! Seeded, splittable random streams.
//!
//! Every stochastic routine takes a master seed. Work is cut into shards of
//! a fixed size and shard `k` draws from ChaCha stream `k` of that seed, so
//! the result does not depend on how many threads run the shards.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Trials per shard. Changing it changes every seeded result.
pub const SHARD_TRIALS: usize = 4096;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn shard_rng(seed: u64, shard: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Splits `trials` into `(shard index, trial count)` pairs.
pub fn shards(trials: usize) -> Vec<(u64, usize)> {
    (0..trials.div_ceil(SHARD_TRIALS))
        .map(|k| {
            let start = k * SHARD_TRIALS;
            (k as u64, SHARD_TRIALS.min(trials - start))
        })
        .collect()
}
