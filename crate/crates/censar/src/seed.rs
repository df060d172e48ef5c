//! Deterministic derivation of sub-stream seeds from a master seed.
//!
//! Every randomized component (Gibbs chains, simulation replications, Louis
//! draws) receives its own seed derived from the master seed and a fixed tag
//! path, so results are reproducible regardless of thread scheduling.

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a tag path.
///
/// The same `(master, tags)` pair always yields the same seed; distinct tag
/// paths yield statistically independent streams.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ 0x5851_F42D_4C95_7F2D);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t));
    }
    s
}

/// Tag constants for the crate's RNG streams.
pub mod tags {
    pub const GIBBS_CHAIN: u64 = 0x01;
    pub const E_STEP: u64 = 0x02;
    pub const LOUIS: u64 = 0x03;
    pub const DGP: u64 = 0x04;
    pub const REPLICATION: u64 = 0x05;
    pub const FIT: u64 = 0x06;
    pub const FORENSIC: u64 = 0x07;
}
