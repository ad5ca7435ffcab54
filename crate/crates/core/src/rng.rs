//! Counter-based seed derivation. Every random quantity in a run comes from
//! a ChaCha stream keyed by `(seed, purpose)`, so results do not depend on
//! the order in which runs are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sub-streams of one game run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Strategies = 0,
    InitScores = 1,
    Signals = 2,
    Noise = 3,
    /// Spot-check step selection and other bookkeeping draws.
    Audit = 4,
}

pub fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th member of an ensemble keyed by `master`.
pub fn member_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
