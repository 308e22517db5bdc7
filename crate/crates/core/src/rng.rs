//! Seeded, splittable random streams.
//!
//! Every stochastic operation takes a generator built from an [`RngSeed`].
//! Independent substreams are derived by mixing a tag into the parent seed,
//! so results do not depend on the order in which substreams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type PbctRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    /// Seed of an independent substream identified by `tag`.
    pub fn derive(self, tag: u64) -> Self {
        Self(splitmix64(
            self.0 ^ splitmix64(tag.wrapping_add(0x6a09_e667_f3bc_c909)),
        ))
    }

    /// Seed derived from a path of tags, e.g. a tree node index.
    pub fn derive_path(self, tags: &[u32]) -> Self {
        tags.iter()
            .fold(self.derive(u64::MAX), |s, &t| s.derive(u64::from(t)))
    }

    pub fn rng(self) -> PbctRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self(seed)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
