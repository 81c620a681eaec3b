//! Seed derivation for schedule-independent random streams.
//!
//! Every replicate (Monte Carlo draw, bootstrap resample, ZBM fit) gets its
//! own generator seeded from `(master seed, stream, index)`, so results do
//! not depend on the order in which replicates are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicateRng = ChaCha8Rng;

/// Stream tags keep different consumers of one master seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Population = 1,
    Sample = 2,
    Bootstrap = 3,
    ZbmFit = 4,
    CommonRandomNumbers = 5,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    mix64(mix64(master ^ mix64(stream as u64)).wrapping_add(index))
}

pub fn replicate_rng(master: u64, stream: Stream, index: u64) -> ReplicateRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}
