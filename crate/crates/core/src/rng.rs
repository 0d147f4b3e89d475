//! Seeded random streams.
//!
//! Every random stream is ChaCha8 seeded with `ChaCha8Rng::seed_from_u64`.
//! Independent sub-streams (tree-building runs, cross-validation folds) use
//! the seed `base.wrapping_add(index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}
