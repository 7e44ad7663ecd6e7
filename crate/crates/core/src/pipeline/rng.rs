//! Counter-based splitting of one 64-bit seed into independent streams.
//!
//! Every random decision in the pipeline draws from its own ChaCha stream,
//! addressed by a purpose tag and an index, so work can be spread across
//! threads without changing any drawn value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    SourceAction = 1,
    TargetAction = 2,
    TargetObservable = 3,
    GoodObservable = 4,
    Trial = 5,
}

/// The generator for `(purpose, index)` under `seed`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
