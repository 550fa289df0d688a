//! Deterministic seed derivation.

/// Derives an independent stream seed from a master seed and a label.
///
/// FNV-1a over the label, mixed with the master seed through splitmix64.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}

/// Seed for the `index`-th member of a family (trees of a forest, repetitions).
pub fn derive_indexed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(splitmix64(index.wrapping_add(0x9e37_79b9))))
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
