//! Deterministic seed derivation.
//!
//! All randomness in the library flows from a single global seed; component
//! seeds are derived by hashing `(global, component, item)` so that parallel
//! work is order-independent and runs are reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a sub-seed from a global seed, a component name and an item id.
pub fn derive(global: u64, component: &str, item: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update([0u8]);
    h.update(component.as_bytes());
    h.update([0u8]);
    h.update(item.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Derive a sub-seed keyed by an integer index (frame, trial, class, ...).
pub fn derive_indexed(global: u64, component: &str, index: u64) -> u64 {
    derive(global, component, &index.to_string())
}

/// Seeded RNG for a derived stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
