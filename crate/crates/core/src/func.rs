//! Whitelisted integer functions for schedules, growth bounds, and quotas.
//!
//! Evaluation saturates at `u64::MAX` so exponential entries never wrap.

use alloc::boxed::Box;
use alloc::vec::Vec;

/// A total function on the naturals from a small closed-form whitelist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntFn {
    Const(u64),
    /// `a*n + b`
    Linear { a: u64, b: u64 },
    /// Coefficients in ascending degree order: `c0 + c1*n + c2*n^2 + …`
    Poly(Vec<u64>),
    /// `scale * base^n + offset`
    Exp { base: u64, scale: u64, offset: u64 },
    /// Explicit values, falling back to `beyond` past the table.
    Table { values: Vec<u64>, beyond: Box<IntFn> },
}

impl IntFn {
    pub fn eval(&self, n: u64) -> u64 {
        match self {
            IntFn::Const(c) => *c,
            IntFn::Linear { a, b } => a.saturating_mul(n).saturating_add(*b),
            IntFn::Poly(coeffs) => {
                let mut acc: u64 = 0;
                let mut pow: u64 = 1;
                for (i, c) in coeffs.iter().enumerate() {
                    acc = acc.saturating_add(c.saturating_mul(pow));
                    if i + 1 < coeffs.len() {
                        pow = pow.saturating_mul(n);
                    }
                }
                acc
            }
            IntFn::Exp { base, scale, offset } => {
                let mut pow: u64 = 1;
                for _ in 0..n {
                    pow = pow.saturating_mul(*base);
                    if pow == u64::MAX {
                        break;
                    }
                }
                scale.saturating_mul(pow).saturating_add(*offset)
            }
            IntFn::Table { values, beyond } => match values.get(n as usize) {
                Some(v) => *v,
                None => beyond.eval(n),
            },
        }
    }

    /// Checks `f(n) ≤ f(n+1)` on `[0, horizon]`.
    pub fn is_nondecreasing_up_to(&self, horizon: u64) -> bool {
        let mut prev = self.eval(0);
        for n in 1..=horizon {
            let v = self.eval(n);
            if v < prev {
                return false;
            }
            prev = v;
        }
        true
    }

    /// Checks `f(n) < f(n+1)` on `[0, horizon]`.
    pub fn is_increasing_up_to(&self, horizon: u64) -> bool {
        let mut prev = self.eval(0);
        for n in 1..=horizon {
            let v = self.eval(n);
            if v <= prev {
                return false;
            }
            prev = v;
        }
        true
    }
}

/// `⌈log2 m⌉` for `m ≥ 1`.
pub fn ceil_log2(m: u64) -> u64 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn closed_forms() {
        assert_eq!(IntFn::Const(3).eval(100), 3);
        assert_eq!(IntFn::Linear { a: 2, b: 2 }.eval(5), 12);
        assert_eq!(IntFn::Poly(vec![0, 0, 1]).eval(7), 49); // n^2
        assert_eq!(IntFn::Exp { base: 2, scale: 1, offset: 0 }.eval(10), 1024);
        let t = IntFn::Table { values: vec![5, 1], beyond: Box::new(IntFn::Const(9)) };
        assert_eq!(t.eval(0), 5);
        assert_eq!(t.eval(1), 1);
        assert_eq!(t.eval(2), 9);
    }

    #[test]
    fn saturation() {
        let f = IntFn::Exp { base: 2, scale: 1, offset: 0 };
        assert_eq!(f.eval(200), u64::MAX);
    }

    #[test]
    fn monotonicity_check() {
        assert!(IntFn::Poly(vec![0, 0, 1]).is_nondecreasing_up_to(50));
        assert!(IntFn::Linear { a: 1, b: 0 }.is_increasing_up_to(50));
        let t = IntFn::Table { values: vec![5, 1], beyond: Box::new(IntFn::Const(9)) };
        assert!(!t.is_nondecreasing_up_to(3));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
    }
}
