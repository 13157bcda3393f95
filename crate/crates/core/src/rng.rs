//! Reproducible random streams.
//!
//! Every trajectory owns a ChaCha8 generator keyed by the master seed and
//! positioned on its own 64-bit stream, so streams never overlap and a run is
//! fully determined by `(master, index)` regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream `index` under `master`.
pub fn stream(master: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(master));
    rng.set_stream(index);
    rng
}

/// Derives a sub-seed for a named phase of an experiment, so that e.g. the
/// static and dynamic parts of one run do not share streams.
pub fn subseed(master: u64, tag: &str) -> u64 {
    tag.bytes().fold(mix64(master), |h, b| mix64(h ^ b as u64))
}
