//! Exact dyadic rationals: `num / 2^exp` in canonical lowest form.
//!
//! All measure values in this crate live here. Arithmetic never rounds;
//! comparisons are exact.

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// An exact dyadic rational. The exponent is minimal: either the numerator
/// is odd, or the exponent is zero (zero is stored as `0 / 2^0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { num: BigInt::from(n), exp: 0 }
    }

    /// `num / 2^exp` from machine integers.
    pub fn ratio(num: i64, exp: u64) -> Self {
        Dyadic::new(BigInt::from(num), exp)
    }

    /// `2^{-k}`.
    pub fn two_pow_neg(k: u64) -> Self {
        Dyadic { num: BigInt::one(), exp: k }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && (&self.num % 2u8).is_zero() {
            self.num /= 2;
            self.exp -= 1;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn halve(&self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        Dyadic::new(self.num.clone(), self.exp + 1)
    }

    pub fn add(&self, other: &Dyadic) -> Self {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        Dyadic::new(a + b, exp)
    }

    pub fn sub(&self, other: &Dyadic) -> Self {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        Dyadic::new(a - b, exp)
    }

    pub fn mul(&self, other: &Dyadic) -> Self {
        Dyadic::new(&self.num * &other.num, self.exp + other.exp)
    }

    pub fn pow(&self, k: u64) -> Self {
        let mut acc = Dyadic::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// One minus this value.
    pub fn complement(&self) -> Self {
        Dyadic::one().sub(self)
    }

    /// `⌈-log2 self⌉` for a strictly positive value.
    ///
    /// For `num/2^exp` with `num ≥ 1` this is `exp + 1 - bitlength(num)`,
    /// which is exact for powers of two and for everything in between.
    pub fn ceil_neg_log2(&self) -> Option<i64> {
        if self.num.is_zero() || self.num.is_negative() {
            return None;
        }
        let bits = self.num.bits() as i64;
        Some(self.exp as i64 + 1 - bits)
    }

    /// Decimal rendering of the numerator, for emission.
    pub fn num_string(&self) -> String {
        self.num.to_string()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    #[test]
    fn canonical_form() {
        let x = d(4, 3); // 4/8 = 1/2
        assert_eq!(x, d(1, 1));
        assert_eq!(x.exponent(), 1);
        let z = d(0, 7);
        assert!(z.is_zero());
        assert_eq!(z.exponent(), 0);
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = d(3, 2); // 3/4
        let b = d(1, 2); // 1/4
        assert_eq!(a.add(&b), Dyadic::one());
        assert_eq!(a.sub(&b), d(1, 1));
        assert_eq!(a.mul(&a), d(9, 4)); // 9/16
        assert_eq!(a.halve(), d(3, 3));
        assert_eq!(a.complement(), b);
    }

    #[test]
    fn ordering() {
        assert!(d(9, 4) > d(1, 1)); // 9/16 > 1/2
        assert!(d(1, 3) < d(1, 2));
        assert_eq!(d(2, 1).cmp(&Dyadic::one()), Ordering::Equal);
    }

    #[test]
    fn ceil_neg_log2_values() {
        assert_eq!(Dyadic::one().ceil_neg_log2(), Some(0));
        assert_eq!(d(1, 3).ceil_neg_log2(), Some(3));
        assert_eq!(d(3, 2).ceil_neg_log2(), Some(1)); // -log2(3/4) ≈ 0.415
        assert_eq!(d(9, 4).ceil_neg_log2(), Some(1)); // -log2(9/16) ≈ 0.830
        assert_eq!(d(1, 0).ceil_neg_log2(), Some(0));
        assert_eq!(d(2, 0).ceil_neg_log2(), Some(-1));
        assert_eq!(d(6, 0).ceil_neg_log2(), Some(-2));
        assert_eq!(Dyadic::zero().ceil_neg_log2(), None);
    }

    #[test]
    fn powers() {
        let q = d(3, 2);
        assert_eq!(q.pow(2), d(9, 4));
        assert_eq!(q.pow(0), Dyadic::one());
    }
}
