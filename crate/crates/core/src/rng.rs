//! Keyed random streams.
//!
//! Every random draw in an experiment comes from a ChaCha8 stream whose
//! 256-bit key is the tuple `(base seed, epoch, slot, purpose)`. Streams for
//! different keys are independent, so epochs can run in any order or in
//! parallel and still produce identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for within one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Dummy-packet probing of every link.
    Probe = 1,
    /// Packet forwarding in an exploitation slot.
    Route = 2,
    /// Randomised policy decisions (ε-greedy coin, Thompson draws).
    Policy = 3,
}

/// Deterministic stream for one `(seed, epoch, slot, purpose)` key.
pub fn stream(base_seed: u64, epoch: u64, slot: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..16].copy_from_slice(&epoch.to_le_bytes());
    key[16..24].copy_from_slice(&slot.to_le_bytes());
    key[24..32].copy_from_slice(&(purpose as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream for ad-hoc use (tests, one-off simulations) from a single seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
