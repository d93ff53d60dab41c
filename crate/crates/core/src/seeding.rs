//! Seed derivation and labelled random sub-streams.
//!
//! Each replication owns one 64-bit run seed. Independent sub-streams are
//! ChaCha8 generators keyed by that seed and a fixed stream label, so the
//! arrival, file and service sequences do not depend on how many draws a
//! mapping strategy consumes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Fixed labels selecting ChaCha stream numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Topology = 1,
    Placement = 2,
    Arrivals = 3,
    Files = 4,
    Service = 5,
    /// PSS branch variable.
    Branch = 6,
    /// Uniform tie-breaking inside strategies.
    Ties = 7,
}

pub fn stream(seed: u64, label: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label as u64);
    rng
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Run seed for replication `run` of sweep point `point`:
/// `splitmix64(splitmix64(splitmix64(base) ^ point) ^ run)`.
///
/// Each step is a bijection of its input, so for a fixed base and point,
/// distinct runs always map to distinct seeds.
pub fn run_seed(base: u64, point: u64, run: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ point) ^ run)
}
