//! Deterministic substream derivation from one master seed.
//!
//! Every random quantity in a run is drawn from a stream derived as
//! `(master seed, domain tag, index)`, so independent domains (maps, cluster
//! cells, the train/test split) never share draws and cells can be generated
//! in any order, including in parallel, with identical results.
//!
//! Domain tags in use: `"los-map"`, `"vlos-map"`, `"sf-los"`, `"sf-nlos"`,
//! `"clusters"`, `"split"`, `"rss-noise"`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a hash of a byte string; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; decorrelates structured inputs.
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Substream seed for `(master, domain, index)`.
pub fn derive_seed(master: u64, domain: &str, index: u64) -> u64 {
    let mixed = splitmix(master)
        ^ fnv1a(domain.as_bytes()).rotate_left(17)
        ^ splitmix(index ^ 0x5851_f42d_4c95_7f2d);
    splitmix(mixed)
}

/// Seeded stream for `(master, domain, index)`.
pub fn substream(master: u64, domain: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index))
}
