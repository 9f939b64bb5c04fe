//! Counter-based random streams.
//!
//! Every random decision in the generator draws from a stream keyed by
//! `(master_seed, sample index, slot)`. A slot is a stable name such as
//! `"scale"` or `"occluder"`. Keying on the slot means that changing how one
//! attribute consumes randomness never shifts the values of another, and
//! keying on the index means sample `i` can be produced without touching any
//! other sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a; used to turn slot names into stable keys.
pub fn slot_key(name: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the seed of the stream for `(master, index, slot)`.
pub fn stream_seed(master: u64, index: u64, slot: u64) -> u64 {
    let a = mix64(master ^ 0x5851_F42D_4C95_7F2D);
    let b = mix64(a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    mix64(b ^ slot.rotate_left(29))
}

/// Handle on all the streams belonging to one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    master: u64,
    index: u64,
    /// Extra key mixed into every slot; distinguishes nested scopes such as
    /// the symbols of one scene.
    scope: u64,
}

impl Substream {
    pub fn new(master: u64, index: u64) -> Self {
        Self { master, index, scope: 0 }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Stream for a named slot.
    pub fn rng(&self, slot: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed(slot))
    }

    pub fn seed(&self, slot: &str) -> u64 {
        stream_seed(self.master, self.index, slot_key(slot) ^ self.scope)
    }

    /// A nested scope, e.g. symbol `k` of a scene or occluder `k` of an image.
    pub fn child(&self, tag: &str, k: u64) -> Substream {
        Substream {
            master: self.master,
            index: self.index,
            scope: mix64(self.scope ^ slot_key(tag) ^ mix64(k.wrapping_add(1))),
        }
    }
}
