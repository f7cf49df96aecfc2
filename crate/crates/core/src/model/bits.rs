//! Bitstrings for Alice's input and index arithmetic on `{0,1}^log n`.
//!
//! Two conventions live side by side. An input `x ∈ {0,1}^n` is a
//! [`Bitstring`] whose text form lists `x_0 x_1 … x_{n-1}` left to right. An
//! [`Index`] (a vertex, or one of the `log n`-bit outputs `a`, `b`) is a
//! binary numeral, so its text form is most-significant bit first:
//! `Index(6)` with width 3 is `"110"`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest input length supported; inputs are packed into one `u64`.
pub const MAX_BITS: usize = 64;

/// A string of at most 64 bits. Bit `k` is `(bits >> k) & 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    len: u32,
}

impl Bitstring {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "bitstring length {len} exceeds {MAX_BITS}"
            )));
        }
        if len < MAX_BITS && bits >> len != 0 {
            return Err(Error::InvalidParameter(format!(
                "value {bits:#x} does not fit in {len} bits"
            )));
        }
        Ok(Self {
            bits,
            len: len as u32,
        })
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(0, len).expect("length within bounds")
    }

    /// Uniformly random string of the given length.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let bits = rng.random::<u64>() & mask(len);
        Self::new(bits, len).expect("masked to length")
    }

    /// Every string of length `len`, in numeric order of the packed value.
    pub fn all(len: usize) -> impl Iterator<Item = Bitstring> {
        assert!(len < MAX_BITS, "cannot enumerate 2^{len} strings");
        (0..1u64 << len).map(move |bits| Bitstring {
            bits,
            len: len as u32,
        })
    }

    /// Parses `"0110"` as `x_0 = 0, x_1 = 1, x_2 = 1, x_3 = 0`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u64;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' if k < MAX_BITS => bits |= 1 << k,
                '1' => {}
                _ => return Err(Error::Parse(format!("not a bitstring: {s:?}"))),
            }
        }
        Self::new(bits, s.chars().count())
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Bit `k` as 0 or 1.
    #[inline]
    pub fn get(&self, k: usize) -> u8 {
        debug_assert!(k < self.len());
        ((self.bits >> k) & 1) as u8
    }

    /// `(-1)^{x_k}` as ±1.
    #[inline]
    pub fn sign(&self, k: usize) -> i32 {
        1 - 2 * self.get(k) as i32
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.get(k) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Bitstring::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[inline]
pub(crate) fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Parity of the bitwise AND of two equal-length strings.
pub fn dot_mod2(a: &Bitstring, b: &Bitstring) -> Result<u8> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(((a.bits & b.bits).count_ones() & 1) as u8)
}

/// A vertex of `{0,…,n-1}`, read as a `log n`-bit binary numeral. Alice's and
/// Bob's `log n`-bit outputs use the same type.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Index(pub u32);

impl Index {
    #[inline]
    pub fn value(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn xor(self, other: Index) -> Index {
        Index(self.0 ^ other.0)
    }

    /// Inner product mod 2 of the two binary representations.
    #[inline]
    pub fn dot(self, other: Index) -> u8 {
        ((self.0 & other.0).count_ones() & 1) as u8
    }

    #[inline]
    pub fn bit(self, t: u32) -> u8 {
        ((self.0 >> t) & 1) as u8
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Binary numeral of the given width, most significant bit first.
    pub fn to_binary(self, width: usize) -> String {
        (0..width)
            .rev()
            .map(|t| if (self.0 >> t) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parses a binary numeral such as `"110"`.
    pub fn parse_binary(s: &str) -> Result<Index> {
        u32::from_str_radix(s.trim(), 2)
            .map(Index)
            .map_err(|_| Error::Parse(format!("not a binary index: {s:?}")))
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for Index {
    fn from(v: usize) -> Self {
        Index(v as u32)
    }
}

pub fn xor_index(i: Index, j: Index) -> Index {
    i.xor(j)
}

/// `log2 n` when `n` is a power of two.
pub fn exact_log2(n: usize) -> Option<u32> {
    n.is_power_of_two().then(|| n.trailing_zeros())
}

/// Checks that `n` is a power of two in `2..=64` and returns `log2 n`.
pub fn game_log2(n: usize) -> Result<u32> {
    match exact_log2(n) {
        Some(l) if (2..=MAX_BITS).contains(&n) => Ok(l),
        _ => Err(Error::InvalidSize(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_examples() {
        assert_eq!(xor_index(Index(5), Index(5)), Index(0));
        for j in 0..16 {
            assert_eq!(xor_index(Index(0), Index(j)), Index(j));
        }
        assert_eq!(xor_index(Index(3), Index(5)), Index(6));
        assert_eq!(Index(6).to_binary(3), "110");
    }

    #[test]
    fn dot_examples() {
        let p = |s| Bitstring::parse(s).unwrap();
        for b in ["000", "101", "111"] {
            assert_eq!(dot_mod2(&p("000"), &p(b)).unwrap(), 0);
        }
        assert_eq!(dot_mod2(&p("110"), &p("110")).unwrap(), 0);
        assert_eq!(dot_mod2(&p("110"), &p("100")).unwrap(), 1);
        assert_eq!(
            dot_mod2(&p("110"), &p("1100")),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn index_dot_agrees_with_bitstring_dot() {
        for a in 0..8u32 {
            for b in 0..8u32 {
                let x = Bitstring::new(a as u64, 3).unwrap();
                let y = Bitstring::new(b as u64, 3).unwrap();
                assert_eq!(Index(a).dot(Index(b)), dot_mod2(&x, &y).unwrap());
            }
        }
    }

    #[test]
    fn bitstring_text_is_position_ordered() {
        let x = Bitstring::parse("0110").unwrap();
        assert_eq!((x.get(0), x.get(1), x.get(2), x.get(3)), (0, 1, 1, 0));
        assert_eq!(x.to_string(), "0110");
        assert_eq!(x.sign(1), -1);
        assert!(Bitstring::parse("01a").is_err());
        assert!(Bitstring::new(4, 2).is_err());
        assert_eq!(Bitstring::all(3).count(), 8);
    }

    #[test]
    fn sizes() {
        assert_eq!(game_log2(2), Ok(1));
        assert_eq!(game_log2(64), Ok(6));
        assert!(game_log2(1).is_err());
        assert!(game_log2(6).is_err());
        assert!(game_log2(128).is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(bits in any::<u64>(), len in 0usize..=64) {
            let x = Bitstring::new(bits & mask(len), len).unwrap();
            prop_assert_eq!(Bitstring::parse(&x.to_string()).unwrap(), x);
        }

        #[test]
        fn xor_is_an_involution(i in 0u32..64, j in 0u32..64) {
            prop_assert_eq!(xor_index(xor_index(Index(i), Index(j)), Index(j)), Index(i));
        }
    }
}
