//! Seed derivation.
//!
//! Every random stream is keyed by `(master seed, purpose tag, index)` so the
//! draws a component sees do not depend on execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_tag(tag: &str) -> u64 {
    // FNV-1a, then mixed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tag.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// Derives a child seed for stream `index` of purpose `tag`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let a = mix64(master.wrapping_add(GOLDEN_GAMMA));
    let b = mix64(a ^ hash_tag(tag));
    mix64(b.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(master, tag, index))`.
pub fn stream(master: u64, tag: &str, index: u64) -> Rng {
    rng_from_seed(derive_seed(master, tag, index))
}
