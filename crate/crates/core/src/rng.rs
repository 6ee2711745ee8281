//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator seeded with `seed ^ fnv1a64(role)`, so
//! streams for different roles (weights, processing times, initial columns, ...)
//! are independent while remaining reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn stream(seed: u64, role: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(role.as_bytes()))
}
