//! Labeled sub-seed derivation.
//!
//! Every randomized component (catalog sampling, trace generation, weight
//! init, replay sampling, ...) draws from its own ChaCha stream seeded by
//! FNV-1a over a stable label plus the user seed. Adding a new consumer can
//! never shift the stream of an existing one.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the label bytes followed by the little-endian seed bytes.
pub fn sub_seed(label: &str, seed: u64) -> u64 {
    let mut hash = FNV_OFFSET;
    for byte in label.bytes().chain(seed.to_le_bytes()) {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// A ChaCha20 stream dedicated to `label`.
pub fn rng_for(label: &str, seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(sub_seed(label, seed))
}
