//! Seeded randomness for sampled checks.
//!
//! Every sampled diagnostic draws from ChaCha8 keyed by the run seed, with a
//! distinct stream number per consumer. ChaCha is a counter-mode generator, so
//! a `(seed, stream)` pair fixes the sequence independently of call order
//! elsewhere in the program.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as Rng;

/// Stream numbers used by the crate's own samplers.
pub mod streams {
    pub const REGULARITY: u64 = 1;
    pub const UPPER_GRADIENT: u64 = 2;
    pub const TRIAL_DENSITIES: u64 = 3;
    pub const SELFTEST: u64 = 4;
}

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
