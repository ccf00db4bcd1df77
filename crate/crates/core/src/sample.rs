//! Exact seeded sampling of streams from a registered measure.
//!
//! Each branch is drawn with the exact conditional probability
//! `μ(σ1)/μ(σ)` by comparing a lazily drawn uniform bit stream against the
//! binary expansion of that rational. Zero-probability branches are never
//! taken, and the result is a pure function of `(index, length, seed)`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;
use crate::registry::{Registry, RegistryError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleError {
    Registry(RegistryError),
    /// The measure is not total up to the requested length.
    PartialBelow { length: u64 },
    /// Both children carry zero mass under a positive parent.
    ZeroMassDeadEnd { sigma: BinStr },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::Registry(e) => write!(f, "{e}"),
            SampleError::PartialBelow { length } => {
                write!(f, "measure is partial below length {length}")
            }
            SampleError::ZeroMassDeadEnd { sigma } => {
                write!(f, "malformed measure: zero-mass children below {sigma}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SampleError {}

impl From<RegistryError> for SampleError {
    fn from(e: RegistryError) -> Self {
        SampleError::Registry(e)
    }
}

struct BitSource {
    rng: ChaCha8Rng,
    buf: u64,
    left: u8,
}

impl BitSource {
    fn new(seed: u64) -> Self {
        BitSource { rng: ChaCha8Rng::seed_from_u64(seed), buf: 0, left: 0 }
    }

    fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let bit = self.buf & 1 == 1;
        self.buf >>= 1;
        self.left -= 1;
        bit
    }
}

/// Draws `true` with probability exactly `num/den` (`0 ≤ num ≤ den`,
/// `den > 0`), consuming bits until the comparison is decided.
fn draw(bits: &mut BitSource, num: &BigUint, den: &BigUint) -> bool {
    if num.is_zero() {
        return false;
    }
    if num == den {
        return true;
    }
    let mut rem = num.clone();
    loop {
        rem <<= 1;
        let digit = rem >= *den;
        if digit {
            rem -= den;
        }
        let bit = bits.next_bit();
        if bit != digit {
            // A 0 drawn against a 1 digit puts the uniform below the
            // threshold; the converse puts it above.
            return !bit & digit;
        }
        if rem.is_zero() {
            // Expansion terminated; remaining uniform bits land above it
            // with probability one, and exactly at it with probability zero.
            return false;
        }
    }
}

fn to_big(d: &Dyadic) -> BigUint {
    d.numerator().magnitude().clone()
}

/// Samples a length-`n` stream from `μ_index`. Deterministic in the seed;
/// the sampled string always has positive measure.
pub fn sample_stream(
    registry: &Registry,
    index: usize,
    n: u64,
    seed: u64,
) -> Result<BinStr, SampleError> {
    let measure = registry
        .measure(index)
        .ok_or(SampleError::Registry(RegistryError::UnknownIndex { index }))?;
    for len in 0..=n {
        if measure.time_complexity(len).is_none() {
            return Err(SampleError::PartialBelow { length: n });
        }
    }
    let mut bits = BitSource::new(seed);
    let mut cur = BinStr::empty();
    for _ in 0..n {
        let parent = measure.eval_final(&cur).ok_or(SampleError::PartialBelow { length: n })?;
        let one = measure
            .eval_final(&cur.child(true))
            .ok_or(SampleError::PartialBelow { length: n })?;
        let zero = measure
            .eval_final(&cur.child(false))
            .ok_or(SampleError::PartialBelow { length: n })?;
        if parent.is_zero() || (one.is_zero() && zero.is_zero()) {
            return Err(SampleError::ZeroMassDeadEnd { sigma: cur });
        }
        // P(next bit = 1) = μ(σ1)/μ(σ), as a ratio of dyadics.
        let (a, b) = ratio(&one, &parent);
        let bit = draw(&mut bits, &a, &b);
        cur = cur.child(bit);
    }
    Ok(cur)
}

/// `(num, den)` with `x/y = num/den` for dyadics `x ≤ y`.
fn ratio(x: &Dyadic, y: &Dyadic) -> (BigUint, BigUint) {
    let (xe, ye) = (x.exponent(), y.exponent());
    let shift_x = ye.saturating_sub(xe);
    let shift_y = xe.saturating_sub(ye);
    (to_big(x) << shift_x, to_big(y) << shift_y)
}

/// Collects sampled streams for a block of consecutive seeds.
pub fn sample_block(
    registry: &Registry,
    index: usize,
    n: u64,
    base_seed: u64,
    count: u64,
) -> Result<Vec<BinStr>, SampleError> {
    (0..count).map(|k| sample_stream(registry, index, n, base_seed + k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::bs;
    use crate::measure::{Schedule, StagedMeasure};
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    fn reg() -> Registry {
        Registry::new(
            alloc::vec![
                StagedMeasure::uniform(Schedule::instant()),
                StagedMeasure::bernoulli(dy(3, 2), Schedule::instant()),
                StagedMeasure::bernoulli(Dyadic::one(), Schedule::instant()),
            ],
            0,
        )
    }

    #[test]
    fn atom_measure_is_forced() {
        let r = reg();
        for seed in 0..20 {
            assert_eq!(sample_stream(&r, 2, 5, seed).unwrap(), bs("11111"));
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let r = reg();
        let a = sample_stream(&r, 0, 4, 7).unwrap();
        let b = sample_stream(&r, 0, 4, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_stream(&r, 0, 64, 8).unwrap();
        assert_ne!(sample_stream(&r, 0, 64, 9).unwrap(), c);
    }

    #[test]
    fn partial_measure_rejected() {
        let m = StagedMeasure {
            kind: crate::measure::MeasureKind::Uniform,
            schedule: Schedule { stage_fn: crate::func::IntFn::Const(0), total_upto: Some(3) },
        };
        let r = Registry::new(alloc::vec![m], 0);
        assert!(matches!(sample_stream(&r, 0, 4, 0), Err(SampleError::PartialBelow { .. })));
    }

    #[test]
    fn leading_one_frequency_matches_bias() {
        // Chernoff: over 1000 seeds the leading-1 rate of bernoulli(3/4)
        // stays within [0.70, 0.80] except with negligible probability.
        let r = reg();
        let mut ones = 0u32;
        for seed in 0..1000 {
            if sample_stream(&r, 1, 1, seed).unwrap().bit(0) {
                ones += 1;
            }
        }
        assert!((700..=800).contains(&ones), "leading-one count {ones} out of range");
    }
}
