//! Child-seed derivation for (cell, realization) pairs.
//!
//! The indices are packed into disjoint bit fields of one word, XORed with a
//! key derived from the master seed, and passed through the SplitMix64
//! finalizer. Every stage is a bijection on `u64`, so distinct index triples
//! under one master seed always receive distinct child seeds.

use crate::error::{Error, Result};

pub const SEED_MIXER_ID: &str =
    "splitmix64-finalizer((a_index << 44 | r_index << 24 | realization) ^ splitmix64-finalizer(master + 0x9E3779B97F4A7C15))";

pub const MAX_AXIS_INDEX: u32 = (1 << 20) - 1;
pub const MAX_REALIZATION: u32 = (1 << 24) - 1;

/// SplitMix64 output function (Steele, Lea & Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn child_seed(master: u64, a_index: u32, r_index: u32, realization: u32) -> Result<u64> {
    if a_index > MAX_AXIS_INDEX || r_index > MAX_AXIS_INDEX || realization > MAX_REALIZATION {
        return Err(Error::Config(format!(
            "seed indices out of range: a_index={a_index}, r_index={r_index}, realization={realization}"
        )));
    }
    let packed = (u64::from(a_index) << 44) | (u64::from(r_index) << 24) | u64::from(realization);
    let key = splitmix64(master.wrapping_add(0x9E37_79B9_7F4A_7C15));
    Ok(splitmix64(packed ^ key))
}
