//! Named-stream random number generation.
//!
//! Every consumer of randomness pulls from its own ChaCha stream derived from
//! one root seed and a stream name, so adding a new consumer never shifts the
//! draws seen by existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Independent generator for `name`.
    pub fn stream(&self, name: &str) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }

    /// Derived tree, for handing a sub-seed to another component.
    pub fn child(&self, name: &str) -> SeedTree {
        SeedTree::new(splitmix64(self.root ^ fnv1a(name.as_bytes())))
    }

    /// Derived tree indexed by a number (worker id, episode number).
    pub fn indexed(&self, name: &str, index: u64) -> SeedTree {
        SeedTree::new(splitmix64(self.child(name).root.wrapping_add(splitmix64(index))))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
