//! The reversible shaping transforms.
//!
//! A family of order `K` holds `K` bijections on 64-bit values. Transform
//! `i` XORs the key with a per-tag seed constant and then runs a fixed
//! invertible finalizer (xor-shift / odd-multiply rounds). Every step is a
//! bijection on `u64`, so the composite is one too, and the inverse is
//! recovered by unfolding each xor-shift and multiplying by the modular
//! inverse of each odd constant. All constants are fixed so independent
//! implementations agree bit for bit.

use crate::{Error, Result};

/// Seed stride: tag `i` uses the constant `(i + 1) * GOLDEN_GAMMA`.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
const MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// Multiplicative inverse of an odd constant mod 2^64, by Newton iteration.
/// Each step doubles the number of correct low bits; six steps cover 64.
const fn mul_inverse(m: u64) -> u64 {
    let mut x = m;
    let mut i = 0;
    while i < 6 {
        x = x.wrapping_mul(2u64.wrapping_sub(m.wrapping_mul(x)));
        i += 1;
    }
    x
}

const INV_MUL_1: u64 = mul_inverse(MUL_1);
const INV_MUL_2: u64 = mul_inverse(MUL_2);

/// The fixed finalizer: the mixing rounds shared by shaping, the table's
/// home index, and the workload streams.
#[inline]
pub fn mix64(mut v: u64) -> u64 {
    v ^= v >> 30;
    v = v.wrapping_mul(MUL_1);
    v ^= v >> 27;
    v = v.wrapping_mul(MUL_2);
    v ^= v >> 31;
    v
}

/// Exact inverse of [`mix64`].
#[inline]
pub fn unmix64(mut v: u64) -> u64 {
    v = invert_xorshift(v, 31);
    v = v.wrapping_mul(INV_MUL_2);
    v = invert_xorshift(v, 27);
    v = v.wrapping_mul(INV_MUL_1);
    v = invert_xorshift(v, 30);
    v
}

/// Inverts `x ^= x >> s`. Re-substituting the output clears one more
/// shifted copy per round; after ceil(64/s) - 1 rounds the shift has
/// fallen off the word.
#[inline]
fn invert_xorshift(y: u64, s: u32) -> u64 {
    debug_assert!((1..64).contains(&s));
    let mut x = y;
    for _ in 0..(63 / s) {
        x = y ^ (x >> s);
    }
    x
}

/// A 64-bit key: the unit of storage and query. Any value is legal; key
/// sets hold pairwise-distinct keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key(pub u64);

/// Index of the transform chosen at insertion, stored alongside the shaped
/// value so the original key stays recoverable. Fits in ceil(log2 K) bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ShapingTag(u8);

impl ShapingTag {
    pub fn new(index: u8) -> Self {
        ShapingTag(index)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The `K` reversible transforms `f_0 .. f_{K-1}` with their seed constants.
#[derive(Debug, Clone)]
pub struct ShapingFamily {
    seeds: Vec<u64>,
}

impl ShapingFamily {
    /// Family of order `k`, seeded with the fixed stride constants. Tags are
    /// stored as a byte, so `k` is capped at 256.
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "shaping order must be at least 1");
        assert!(k <= 256, "shaping order exceeds tag width");
        let seeds = (0..k)
            .map(|i| (i as u64 + 1).wrapping_mul(GOLDEN_GAMMA))
            .collect();
        ShapingFamily { seeds }
    }

    pub fn k(&self) -> usize {
        self.seeds.len()
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    /// Forward transform without tag validation; callers guarantee `i < k`.
    #[inline]
    pub(crate) fn shape_raw(&self, key: u64, i: usize) -> u64 {
        mix64(key ^ self.seeds[i])
    }

    #[inline]
    pub(crate) fn unshape_raw(&self, shaped: u64, i: usize) -> u64 {
        unmix64(shaped) ^ self.seeds[i]
    }

    fn check(&self, tag: ShapingTag) -> Result<usize> {
        let i = tag.index();
        if i >= self.k() {
            return Err(Error::TagOutOfRange {
                tag: tag.0,
                k: self.k(),
            });
        }
        Ok(i)
    }
}

/// Applies transform `tag` to `key`: XOR with the tag's seed, then the
/// finalizer. Pure and deterministic.
pub fn shape(key: Key, tag: ShapingTag, family: &ShapingFamily) -> Result<u64> {
    let i = family.check(tag)?;
    Ok(family.shape_raw(key.0, i))
}

/// Exact inverse of [`shape`] for the same tag.
pub fn unshape(shaped: u64, tag: ShapingTag, family: &ShapingFamily) -> Result<Key> {
    let i = family.check(tag)?;
    Ok(Key(family.unshape_raw(shaped, i)))
}

/// All `K` shaped forms of `key`, in ascending tag order.
pub fn candidates(key: Key, family: &ShapingFamily) -> Vec<u64> {
    (0..family.k())
        .map(|i| family.shape_raw(key.0, i))
        .collect()
}
