//! Per-stage seed derivation from one master seed.
//!
//! Each stage seed is the first eight bytes (little endian) of
//! `SHA-256(master_seed_le || stage_name)`, so stages can be rerun in
//! isolation and still see the same random stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const STAGE_SPLIT: &str = "split";
pub const STAGE_ADVERSE_SPLIT: &str = "adverse_split";
pub const STAGE_USER_CLUSTERING: &str = "user_clustering";
pub const STAGE_DRUG_CLUSTERING: &str = "drug_clustering";
pub const STAGE_USER_NET: &str = "user_net";
pub const STAGE_DRUG_NET: &str = "drug_net";
pub const STAGE_BASELINE: &str = "baseline";
pub const STAGE_SYNTHETIC: &str = "synthetic";

pub const ALL_STAGES: [&str; 8] = [
    STAGE_SPLIT,
    STAGE_ADVERSE_SPLIT,
    STAGE_USER_CLUSTERING,
    STAGE_DRUG_CLUSTERING,
    STAGE_USER_NET,
    STAGE_DRUG_NET,
    STAGE_BASELINE,
    STAGE_SYNTHETIC,
];

pub fn derive_seed(master: u64, stage: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(stage.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// The generator used everywhere in the crate. ChaCha8 output is identical
/// across platforms for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
