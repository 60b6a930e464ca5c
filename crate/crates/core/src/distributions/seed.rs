//! Hierarchical seed lineages.
//!
//! Every random draw in the crate is addressed by a [`SeedPath`]: a master
//! seed plus an ordered list of `(level, index)` pairs such as
//! `master → path 3 → replicate 17 → bootstrap 42`. The generator for a
//! lineage is a Xoshiro256++ stream whose 256-bit state is the SHA-256 digest
//! of the encoded lineage, so results never depend on the order in which
//! lineages are visited or on how work is split between threads.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

/// The generator behind every [`SeedPath`].
pub type StreamRng = Xoshiro256PlusPlus;

const DOMAIN: &[u8] = b"volboot/seed-path/v1";

/// Role of one step in a seed lineage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[repr(u8)]
pub enum Level {
    Path = 1,
    Replicate = 2,
    Volatility = 3,
    Innovations = 4,
    Signs = 5,
    Bootstrap = 6,
    Multipliers = 7,
    Oracle = 8,
    Grid = 9,
    Jumps = 10,
    Custom = 255,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedPath {
    master_seed: u64,
    lineage: Vec<(Level, u64)>,
}

impl SeedPath {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            lineage: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn lineage(&self) -> &[(Level, u64)] {
        &self.lineage
    }

    /// Extends the lineage by one step.
    pub fn child(&self, level: Level, index: u64) -> Self {
        let mut lineage = Vec::with_capacity(self.lineage.len() + 1);
        lineage.extend_from_slice(&self.lineage);
        lineage.push((level, index));
        Self {
            master_seed: self.master_seed,
            lineage,
        }
    }

    /// 256-bit stream key: SHA-256 over the domain tag, the master seed and
    /// each `(level, index)` pair, with the lineage length as a prefix so that
    /// no lineage encoding is a prefix of another.
    pub fn key(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN);
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((self.lineage.len() as u64).to_le_bytes());
        for &(level, index) in &self.lineage {
            hasher.update([level as u8]);
            hasher.update(index.to_le_bytes());
        }
        hasher.finalize().into()
    }

    pub fn rng(&self) -> StreamRng {
        StreamRng::from_seed(self.key())
    }
}
