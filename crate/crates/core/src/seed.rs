//! Deterministic generator derivation.
//!
//! Every random draw in an experiment comes from a generator derived from a
//! master seed and a tuple of labels (for example cell and trial indices),
//! so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha20Rng;

/// Generator for the stream identified by `labels` under `master`.
///
/// With no labels this is the generator seeded directly from `master`.
pub fn seed_derive(master: u64, labels: &[u64]) -> SeededRng {
    if labels.is_empty() {
        return ChaCha20Rng::seed_from_u64(master);
    }
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((labels.len() as u64).to_le_bytes());
    for label in labels {
        hasher.update(label.to_le_bytes());
    }
    ChaCha20Rng::from_seed(hasher.finalize().into())
}
