//! Deterministic per-replicate random streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator handed to each simulation replicate.
pub type ReplicateRng = ChaCha12Rng;

/// Derive the generator for one replicate of a run.
///
/// Streams with the same master seed and different replicate indices are
/// independent by construction (the index selects the cipher stream), so a
/// replicate draws the same numbers whether the run is serial or parallel.
pub fn derive_seed_stream(master_seed: u64, replicate_index: u64) -> ReplicateRng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate_index);
    rng
}
