//! Counter-based seeding.
//!
//! Every random stream in the crate is derived from a master seed plus a
//! short path of integer labels (cell index, trial index, purpose). The
//! derivation is a SplitMix64 chain, so a stream depends only on its labels
//! and never on scheduling or on how many other streams were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator used throughout the crate.
pub type SimRng = ChaCha12Rng;

/// Default master seed used by the CLI and the shipped configs.
pub const DEFAULT_SEED: u64 = 0x5EED_2024_0C5;

/// Stream labels for the independent parts of one trial.
pub mod purpose {
    pub const SIGNAL: u64 = 1;
    pub const SENSING: u64 = 2;
    pub const SIGNS: u64 = 3;
    pub const DIAGNOSTICS: u64 = 4;
    pub const MONTE_CARLO: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `labels` into `master` and returns the derived 64-bit seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix64(master), |acc, &l| splitmix64(acc ^ splitmix64(l)))
}

/// Generator for the stream addressed by `labels` under `master`.
pub fn stream(master: u64, labels: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, labels))
}
