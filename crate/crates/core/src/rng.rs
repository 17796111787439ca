//! Counter-based seed derivation.
//!
//! Every stochastic entity (a decoder trial, a disorder sample, a replica
//! ladder) owns a stream seeded from `SHA-256(master_seed || path)`. Streams
//! therefore do not depend on how jobs are partitioned across workers.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

pub type SimRng = Xoshiro256PlusPlus;

/// 32 seed bytes for the entity at `path` under `master`.
pub fn derive_seed_bytes(master: u64, path: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(path.as_bytes());
    hasher.finalize().into()
}

/// A 64-bit child seed, for handing to APIs that take `u64` seeds.
pub fn derive_seed(master: u64, path: &str) -> u64 {
    let bytes = derive_seed_bytes(master, path);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

pub fn stream(master: u64, path: &str) -> SimRng {
    SimRng::from_seed(derive_seed_bytes(master, path))
}
