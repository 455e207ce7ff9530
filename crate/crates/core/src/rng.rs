//! Seeded, counter-based random streams.
//!
//! All randomness comes from ChaCha20 keyed by a user seed. Independent
//! consumers never share a stream: each one selects a 64-bit stream id
//! `domain << 48 | index`, so the random circuit of replica `r` and the shot
//! batch of `(replica, moment)` can be regenerated in isolation and in any
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub use rand::Rng;
pub type StreamRng = ChaCha20Rng;

/// Consumer classes; each owns a disjoint range of stream ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Domain {
    /// Gate draws of a random circuit. Index: replica.
    Circuit = 1,
    /// Ancilla measurement outcomes. Index: see [`shot_index`].
    Shots = 2,
    /// Anything else a caller needs (tests, ad-hoc sampling).
    Aux = 3,
}

/// Opens stream `index` of `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

/// Stream index of the shot batch for (replica, moment index, basis).
pub fn shot_index(replica: u32, moment: u32, basis_y: bool) -> u64 {
    ((replica as u64) << 24) | ((moment as u64) << 1) | basis_y as u64
}
