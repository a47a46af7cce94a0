//! Seed discipline.
//!
//! Every random object is drawn from a ChaCha20 stream whose 64-bit seed is
//! derived from a master seed by walking a path of integer labels. A child
//! seed is `splitmix64(parent ^ splitmix64(label))`, so any node of the tree
//! can be regenerated from `(master, path)` alone, independent of the order
//! in which other nodes were visited.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Generator used for every sampled object in the crate.
pub type Rng = ChaCha20Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A node in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(value: u64) -> Self {
        Seed(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn child(self, label: u64) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(label)))
    }

    pub fn path(self, labels: &[u64]) -> Seed {
        labels.iter().fold(self, |s, &l| s.child(l))
    }

    pub fn rng(self) -> Rng {
        ChaCha20Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

/// Labels for the first level of the tree, so unrelated consumers of one
/// master seed never share a stream.
pub mod stream {
    pub const STATES: u64 = 1;
    pub const RESTARTS: u64 = 2;
    pub const PARAM_SAMPLES: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const CIRCUITS: u64 = 5;
}
