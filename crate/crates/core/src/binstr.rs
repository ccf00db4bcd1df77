//! Finite binary strings: the index set of every measure in the crate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A finite string over `{0,1}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BinStr {
    bits: Vec<bool>,
}

impl BinStr {
    pub fn empty() -> Self {
        BinStr { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BinStr { bits }
    }

    /// Parse from a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return None,
            }
        }
        Some(BinStr { bits })
    }

    pub fn len(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: u64) -> bool {
        self.bits[i as usize]
    }

    /// The prefix of length `n` (`n` must not exceed the length).
    pub fn prefix(&self, n: u64) -> BinStr {
        BinStr { bits: self.bits[..n as usize].to_vec() }
    }

    /// This string extended by one bit.
    pub fn child(&self, bit: bool) -> BinStr {
        let mut bits = self.bits.clone();
        bits.push(bit);
        BinStr { bits }
    }

    pub fn concat(&self, other: &BinStr) -> BinStr {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BinStr { bits }
    }

    pub fn is_prefix_of(&self, other: &BinStr) -> bool {
        other.bits.len() >= self.bits.len() && other.bits[..self.bits.len()] == self.bits[..]
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().filter(|b| **b).count() as u64
    }

    /// All strings of length `n` in lexicographic order (0 before 1).
    pub fn all_of_length(n: u64) -> impl Iterator<Item = BinStr> {
        let n = n as usize;
        (0u64..(1u64 << n)).map(move |v| {
            let bits = (0..n).map(|i| (v >> (n - 1 - i)) & 1 == 1).collect();
            BinStr { bits }
        })
    }

    /// All extensions of `self` of length `n ≥ |self|`, lexicographic.
    pub fn extensions(&self, n: u64) -> impl Iterator<Item = BinStr> + '_ {
        let tail = n - self.len();
        BinStr::all_of_length(tail).map(move |t| self.concat(&t))
    }

    /// Both children, 0-child first.
    pub fn children(&self) -> [BinStr; 2] {
        [self.child(false), self.child(true)]
    }

    /// Whether `set` is prefix-free (no member a proper prefix of another).
    pub fn is_prefix_free(set: &[BinStr]) -> bool {
        for (i, a) in set.iter().enumerate() {
            for b in set.iter().skip(i + 1) {
                if a.is_prefix_of(b) || b.is_prefix_of(a) {
                    return false;
                }
            }
        }
        true
    }

    pub fn as_string(&self) -> String {
        use core::fmt::Write;
        let mut s = String::with_capacity(self.bits.len());
        for b in &self.bits {
            let _ = write!(s, "{}", if *b { '1' } else { '0' });
        }
        s
    }
}

impl fmt::Display for BinStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return write!(f, "ε");
        }
        for b in &self.bits {
            write!(f, "{}", if *b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

/// `σ = σ0, σ1, …` helper used by tests.
pub fn bs(s: &str) -> BinStr {
    BinStr::parse(s).expect("binary string literal")
}

/// All strings of length at most `n`, shortest first, lexicographic within a
/// length.
pub fn all_up_to(n: u64) -> Vec<BinStr> {
    let mut out = vec![BinStr::empty()];
    for len in 1..=n {
        out.extend(BinStr::all_of_length(len));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_laws() {
        let s = bs("0101");
        assert_eq!(s.prefix(s.len()), s);
        assert_eq!(s.prefix(0), BinStr::empty());
        assert!(s.prefix(2).is_prefix_of(&s));
    }

    #[test]
    fn enumeration_order() {
        let v: Vec<_> = BinStr::all_of_length(2).collect();
        assert_eq!(v, vec![bs("00"), bs("01"), bs("10"), bs("11")]);
        assert_eq!(all_up_to(1), vec![BinStr::empty(), bs("0"), bs("1")]);
    }

    #[test]
    fn prefix_free_detection() {
        assert!(BinStr::is_prefix_free(&[bs("00"), bs("01"), bs("1")]));
        assert!(!BinStr::is_prefix_free(&[bs("0"), bs("01")]));
    }

    #[test]
    fn extensions_of() {
        let s = bs("1");
        let v: Vec<_> = s.extensions(2).collect();
        assert_eq!(v, vec![bs("10"), bs("11")]);
    }
}
