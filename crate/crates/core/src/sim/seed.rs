use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed of trial `index` in stream `stream` under `root`.
///
/// Counter-based: each trial seed is read at a fixed offset of a ChaCha
/// keystream, so serial and parallel schedules derive identical seeds.
pub fn trial_seed(root: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

/// Deterministic generator for one trial.
pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
