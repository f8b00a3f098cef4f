//! Seeded random streams.
//!
//! Every random vector in a run comes from its own ChaCha8 substream keyed by
//! `(master seed, iteration, sample index)`, so a batch can be generated in any
//! order or in parallel and still be reproduced exactly, e.g. by the gold
//! standard estimator replaying the vectors of a mirror descent run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const POTENTIAL_STREAM: u64 = u64::MAX;
const WORDS_PER_SAMPLE: u128 = 1 << 48;

/// Stream used for drawing the background charges.
pub fn potential_stream(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POTENTIAL_STREAM);
    rng
}

/// Stream for Gaussian sample `sample` of iteration `iteration`.
pub fn sample_stream(master: u64, iteration: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(iteration);
    rng.set_word_pos(sample as u128 * WORDS_PER_SAMPLE);
    rng
}

/// Standard Gaussian vector of length `n` for `(master, iteration, sample)`.
pub fn gaussian_vector(master: u64, iteration: u64, sample: u64, n: usize) -> Vec<f64> {
    let mut rng = sample_stream(master, iteration, sample);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
