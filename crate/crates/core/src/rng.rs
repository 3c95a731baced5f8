//! Counter-based random streams.
//!
//! A [`StreamKey`] names a family of independent ChaCha8 streams; the
//! stream for item `i` is addressed directly, so draws never depend on the
//! order or thread in which items are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self(splitmix64(seed ^ 0x6a09_e667_f3bc_c909))
    }

    /// Child key for a sub-task label, e.g. an engine or a sweep index.
    pub fn derive(self, label: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    /// Raw 64-bit key, usable as a seed for another stream family.
    pub fn value(self) -> u64 {
        self.0
    }

    /// Generator for item `index` of this family.
    pub fn rng(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
