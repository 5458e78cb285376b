//! Deterministic seed derivation.
//!
//! Every randomized stage derives its randomness from a per-record seed that
//! is a pure function of the global seed and the record id. Workers can then
//! process records in any order, on any number of threads, and still produce
//! byte-identical output.
//!
//! The mix is fixed and documented so that independent implementations can
//! replay it:
//!
//! 1. `fnv1a64(id)` hashes the record id bytes (FNV-1a, 64-bit).
//! 2. `record_seed(global, id) = splitmix64(global XOR fnv1a64(id))`.
//! 3. `substream(seed, domain) = splitmix64(seed XOR (domain + 1) * GOLDEN)`
//!    where `GOLDEN = 0x9E37_79B9_7F4A_7C15`.
//!
//! Substreams keep independent decisions (unit selection vs. action
//! assignment vs. split bucketing) from sharing one RNG stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// The splitmix64 finalizer. Bijective on u64, so distinct inputs stay distinct.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-record seed: a stable 64-bit mix of the global seed and the record id.
pub fn record_seed(global: u64, record_id: &str) -> u64 {
    splitmix64(global ^ fnv1a64(record_id.as_bytes()))
}

/// Domain-separated child seed for one decision stream within a record.
pub fn substream(seed: u64, domain: u64) -> u64 {
    splitmix64(seed ^ domain.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// Seeded RNG used throughout. ChaCha8 is portable: the same seed yields the
/// same stream on every platform.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
