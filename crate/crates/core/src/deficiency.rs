//! Randomness-deficiency functions and the learner cost.
//!
//! `d_e(σ)[s] = ⌈-log2 μ_e(σ)[s]⌉ - K(σ)[s]`, defined when the measure value
//! is defined and positive and some machine has compressed `σ`. A zero
//! measure value yields the distinct infinite deficiency. Undefined `K`
//! leaves the deficiency undefined, which keeps learner costs total via the
//! empty-max convention.

use crate::binstr::BinStr;
use crate::machine::UniversalMachine;
use crate::registry::Registry;
use core::cmp::Ordering;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeficiencyValue {
    Undefined,
    Finite(i64),
    Infinite,
}

impl DeficiencyValue {
    pub fn is_defined(&self) -> bool {
        !matches!(self, DeficiencyValue::Undefined)
    }

    /// `d ≤ bound`, false when undefined, false when infinite.
    pub fn at_most(&self, bound: i64) -> bool {
        match self {
            DeficiencyValue::Finite(v) => *v <= bound,
            _ => false,
        }
    }

    /// Finite value floored at zero; `cap` stands in for infinity.
    pub fn saturate(&self, cap: u64) -> u64 {
        match self {
            DeficiencyValue::Undefined => 0,
            DeficiencyValue::Finite(v) => (*v).max(0) as u64,
            DeficiencyValue::Infinite => cap,
        }
    }
}

impl fmt::Display for DeficiencyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeficiencyValue::Undefined => write!(f, "undef"),
            DeficiencyValue::Finite(v) => write!(f, "{v}"),
            DeficiencyValue::Infinite => write!(f, "inf"),
        }
    }
}

/// `d_e(σ)[s]`.
pub fn deficiency(
    registry: &Registry,
    universal: &UniversalMachine,
    e: usize,
    sigma: &BinStr,
    stage: u64,
) -> DeficiencyValue {
    let mu = match registry.eval(e, sigma, stage) {
        Ok(Some(v)) => v,
        _ => return DeficiencyValue::Undefined,
    };
    if mu.is_zero() {
        return DeficiencyValue::Infinite;
    }
    let k = match universal.k(sigma, stage) {
        Some(k) => k,
        None => return DeficiencyValue::Undefined,
    };
    let ideal = mu.ceil_neg_log2().expect("positive dyadic has a finite log");
    DeficiencyValue::Finite(ideal - k as i64)
}

/// `𝐝_e` on a finite prefix: the maximum defined prefix deficiency, floored
/// at zero (the empty-prefix convention keeps this total).
pub fn stream_deficiency(
    registry: &Registry,
    universal: &UniversalMachine,
    e: usize,
    prefix: &BinStr,
    stage: u64,
) -> DeficiencyValue {
    let mut best: i64 = 0;
    for n in 0..=prefix.len() {
        match deficiency(registry, universal, e, &prefix.prefix(n), stage) {
            DeficiencyValue::Infinite => return DeficiencyValue::Infinite,
            DeficiencyValue::Finite(v) => best = best.max(v),
            DeficiencyValue::Undefined => {}
        }
    }
    DeficiencyValue::Finite(best)
}

/// A learner cost; infinite when some prefix has infinite deficiency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

/// `cost(σ, e)[s] = e + max{d_e(σ↾n)[s] : n ≤ |σ|, defined}`, with the
/// maximum of the empty set defaulting to zero. Clamped at zero so the cost
/// is a non-negative integer.
pub fn cost(
    registry: &Registry,
    universal: &UniversalMachine,
    sigma: &BinStr,
    e: usize,
    stage: u64,
) -> Cost {
    let mut max_d: Option<i64> = None;
    for n in 0..=sigma.len() {
        match deficiency(registry, universal, e, &sigma.prefix(n), stage) {
            DeficiencyValue::Infinite => return Cost::Infinite,
            DeficiencyValue::Finite(v) => max_d = Some(max_d.map_or(v, |m| m.max(v))),
            DeficiencyValue::Undefined => {}
        }
    }
    let total = e as i64 + max_d.unwrap_or(0);
    Cost::Finite(total.max(0) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::bs;
    use crate::dyadic::Dyadic;
    use crate::machine::PrefixFreeMachine;
    use crate::measure::{Schedule, StagedMeasure};
    use alloc::string::ToString;
    use alloc::vec;
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    fn setup() -> (Registry, UniversalMachine) {
        let registry = Registry::new(
            vec![
                StagedMeasure::uniform(Schedule::instant()),
                StagedMeasure::bernoulli(dy(3, 2), Schedule::instant()),
                StagedMeasure::bernoulli(Dyadic::one(), Schedule::instant()),
            ],
            0,
        );
        let machine = PrefixFreeMachine::new("m".to_string(), 0);
        (registry, UniversalMachine::new(vec![machine]).unwrap())
    }

    #[test]
    fn uniform_ideal_code_gives_zero() {
        let (reg, mut uni) = setup();
        let sigma = bs("10110010");
        uni.machine_mut(0).request(sigma.clone(), 8, 0);
        assert_eq!(deficiency(&reg, &uni, 0, &sigma, 0), DeficiencyValue::Finite(0));
    }

    #[test]
    fn nine_sixteenths_with_k_one() {
        let (reg, mut uni) = setup();
        let sigma = bs("11"); // μ_bern(11) = 9/16, ⌈-log2⌉ = 1
        uni.machine_mut(0).request(sigma.clone(), 1, 0);
        assert_eq!(deficiency(&reg, &uni, 1, &sigma, 0), DeficiencyValue::Finite(0));
    }

    #[test]
    fn zero_mass_is_infinite() {
        let (reg, mut uni) = setup();
        let sigma = bs("0"); // bernoulli(1) gives this zero mass
        uni.machine_mut(0).request(sigma.clone(), 1, 0);
        assert_eq!(deficiency(&reg, &uni, 2, &sigma, 0), DeficiencyValue::Infinite);
    }

    #[test]
    fn undefined_without_requests() {
        let (reg, uni) = setup();
        assert_eq!(deficiency(&reg, &uni, 0, &bs("0"), 5), DeficiencyValue::Undefined);
        assert_eq!(
            stream_deficiency(&reg, &uni, 0, &bs("0101"), 5),
            DeficiencyValue::Finite(0)
        );
    }

    #[test]
    fn deficiency_monotone_in_stage() {
        let (reg, mut uni) = setup();
        let sigma = bs("0000");
        uni.machine_mut(0).request(sigma.clone(), 9, 1);
        uni.machine_mut(0).request(sigma.clone(), 2, 5);
        let d1 = deficiency(&reg, &uni, 0, &sigma, 1);
        let d5 = deficiency(&reg, &uni, 0, &sigma, 5);
        assert_eq!(d1, DeficiencyValue::Finite(-5));
        assert_eq!(d5, DeficiencyValue::Finite(2));
    }

    #[test]
    fn stream_deficiency_is_a_floored_max() {
        let (reg, mut uni) = setup();
        let x = bs("000000000000");
        uni.machine_mut(0).request(x.prefix(8), 4, 0);
        assert_eq!(stream_deficiency(&reg, &uni, 0, &x.prefix(8), 0), DeficiencyValue::Finite(4));
        // Longer prefixes only grow the max.
        assert_eq!(stream_deficiency(&reg, &uni, 0, &x, 0), DeficiencyValue::Finite(4));
    }

    #[test]
    fn cost_examples() {
        let (reg, mut uni) = setup();
        let sigma = bs("01010101");
        // No prefix deficiency defined: the empty max defaults to 0.
        assert_eq!(cost(&reg, &uni, &sigma, 3, 8), Cost::Finite(3));
        // K(σ) = 3 gives d_0(σ) = 8 - 3 = 5, so cost = 3 + 5.
        uni.machine_mut(0).request(sigma.clone(), 3, 0);
        assert_eq!(cost(&reg, &uni, &sigma, 3, 8), Cost::Finite(8));
        // Non-decreasing in stage: a later, shorter request only grows it.
        uni.machine_mut(0).request(sigma.clone(), 1, 9);
        assert_eq!(cost(&reg, &uni, &sigma, 3, 8), Cost::Finite(8));
        assert_eq!(cost(&reg, &uni, &sigma, 3, 9), Cost::Finite(10));
    }
}
