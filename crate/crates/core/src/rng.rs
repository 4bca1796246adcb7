//! Seeded random streams.
//!
//! Every consumer draws from ChaCha8 keyed by `(seed, domain)` with the
//! stream number selecting an independent sequence, so item `k` of a
//! generated list is the same no matter how many items are generated or in
//! which order (or on which thread) they are produced.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the streams of unrelated consumers sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    RivalBids = 0x7269_7661_6c00_0001,
    RandomBids = 0x7261_6e64_6f6d_0002,
    MedianRestarts = 0x706d_7000_0000_0003,
    SyntheticSource = 0x7379_6e74_6800_0004,
}

/// SplitMix64 finalizer, used to fold the domain tag into the key.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ domain as u64));
    rng.set_stream(index);
    rng
}
