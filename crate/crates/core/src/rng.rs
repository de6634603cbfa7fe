//! Deterministic random streams.
//!
//! Every consumer of randomness (an episode, a minibatch shuffle, k-means
//! seeding) gets its own ChaCha8 stream keyed by the run seed plus a tuple of
//! tags, so results never depend on scheduling or thread count and nothing
//! about stream positions has to be persisted.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags, keeping streams for different consumers disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Rollout = 2,
    Shuffle = 3,
    PolicyClusters = 4,
    Probes = 5,
    Eval = 6,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key derived from the seed and an arbitrary tag path.
pub fn stream_key(seed: u64, purpose: Purpose, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ 0x5EED_0000_0000_0000);
    h = splitmix64(h ^ purpose as u64);
    for &t in tags {
        h = splitmix64(h ^ t);
    }
    h
}

pub fn stream(seed: u64, purpose: Purpose, tags: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(stream_key(seed, purpose, tags))
}
