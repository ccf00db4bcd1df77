//! The indexed measure registry: a finite, scenario-defined stand-in for a
//! universal enumeration of partial measure programs.
//!
//! The registry has a fixed number of root slots (base measures plus
//! reservable dynamic slots). Every index at or beyond the root capacity is
//! a padding index that evaluates exactly like its root:
//! `pad(i, j) = N·(j+1) + root(i)`, which is strictly increasing in `j`.
//! A reserved slot may be filled exactly once; until then it evaluates as
//! undefined at every stage.

use alloc::vec::Vec;
use core::fmt;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;
use crate::func::IntFn;
use crate::measure::StagedMeasure;

#[derive(Clone, Debug)]
enum RootSlot {
    Measure(StagedMeasure),
    Reserved,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegistryError {
    UnknownIndex { index: usize },
    NotReserved { index: usize },
    AlreadyFilled { index: usize },
    NoFreeSlot,
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::UnknownIndex { index } => write!(f, "unknown registry index {index}"),
            RegistryError::NotReserved { index } => {
                write!(f, "registry index {index} is not a reserved slot")
            }
            RegistryError::AlreadyFilled { index } => {
                write!(f, "registry index {index} was already filled")
            }
            RegistryError::NoFreeSlot => write!(f, "no reserved slot left to allocate"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RegistryError {}

#[derive(Clone, Debug)]
pub struct Registry {
    roots: Vec<RootSlot>,
    base_count: usize,
    next_reservation: usize,
}

impl Registry {
    /// A registry with the given base measures and `dynamic_slots` reservable
    /// slots after them.
    pub fn new(base: Vec<StagedMeasure>, dynamic_slots: usize) -> Self {
        let base_count = base.len();
        let mut roots: Vec<RootSlot> = base.into_iter().map(RootSlot::Measure).collect();
        for _ in 0..dynamic_slots {
            roots.push(RootSlot::Reserved);
        }
        Registry { roots, base_count, next_reservation: base_count }
    }

    /// Number of root slots; all higher indices are padding.
    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn base_count(&self) -> usize {
        self.base_count
    }

    /// The root index an arbitrary index denotes.
    pub fn resolve(&self, index: usize) -> usize {
        let n = self.roots.len();
        if index < n {
            index
        } else {
            (index - n) % n
        }
    }

    pub fn is_pad(&self, index: usize) -> bool {
        index >= self.roots.len()
    }

    /// The padding function: `pad(i, j)` denotes the same measure as `i`,
    /// and `pad(i, j) < pad(i, j+1)`.
    pub fn pad(&self, i: usize, j: usize) -> usize {
        let n = self.roots.len();
        n * (j + 1) + self.resolve(i)
    }

    /// Least `j` with `pad(i, j) > bound`, returned as the padded index.
    pub fn pad_above(&self, i: usize, bound: usize) -> usize {
        let n = self.roots.len();
        let root = self.resolve(i);
        // pad(i, j) = n(j+1) + root > bound  ⇔  j > (bound - root - n) / n
        let mut j = 0usize;
        if bound >= n + root {
            j = (bound - root - n) / n + 1;
        }
        debug_assert!(self.pad(i, j) > bound);
        debug_assert!(j == 0 || self.pad(i, j - 1) <= bound);
        self.pad(i, j)
    }

    fn root_slot(&self, index: usize) -> Result<&RootSlot, RegistryError> {
        if self.roots.is_empty() {
            return Err(RegistryError::UnknownIndex { index });
        }
        let root = self.resolve(index);
        Ok(&self.roots[root])
    }

    /// The measure behind an index, if its root slot is filled.
    pub fn measure(&self, index: usize) -> Option<&StagedMeasure> {
        match self.root_slot(index).ok()? {
            RootSlot::Measure(m) => Some(m),
            RootSlot::Reserved => None,
        }
    }

    /// `μ_index(σ)[s]`. Reserved slots are undefined at every stage; that is
    /// distinct from the error on an unresolvable index.
    pub fn eval(
        &self,
        index: usize,
        sigma: &BinStr,
        stage: u64,
    ) -> Result<Option<Dyadic>, RegistryError> {
        match self.root_slot(index)? {
            RootSlot::Measure(m) => Ok(m.eval(sigma, stage)),
            RootSlot::Reserved => Ok(None),
        }
    }

    /// The value at any sufficiently late finite stage.
    pub fn eval_final(&self, index: usize, sigma: &BinStr) -> Result<Option<Dyadic>, RegistryError> {
        match self.root_slot(index)? {
            RootSlot::Measure(m) => Ok(m.eval_final(sigma)),
            RootSlot::Reserved => Ok(None),
        }
    }

    /// Whether the denoted measure is total. Reserved slots are not.
    pub fn is_total(&self, index: usize) -> bool {
        match self.measure(index) {
            Some(m) => m.is_total(),
            None => false,
        }
    }

    /// Least stage at which `μ_index` is defined on all of `2^{≤n}`.
    pub fn time_complexity(&self, index: usize, n: u64) -> Option<u64> {
        self.measure(index)?.time_complexity(n)
    }

    pub fn time_complexity_dominates(
        &self,
        index: usize,
        h: &IntFn,
        range: impl Iterator<Item = u64>,
    ) -> bool {
        match self.measure(index) {
            Some(m) => m.time_complexity_dominates(h, range),
            None => true,
        }
    }

    /// Take the next reserved slot, committing to fill it later.
    pub fn reserve(&mut self) -> Result<usize, RegistryError> {
        while self.next_reservation < self.roots.len() {
            let idx = self.next_reservation;
            if matches!(self.roots[idx], RootSlot::Reserved) {
                self.next_reservation += 1;
                return Ok(idx);
            }
            self.next_reservation += 1;
        }
        Err(RegistryError::NoFreeSlot)
    }

    /// Fill a reserved slot. A slot can be filled exactly once.
    pub fn fill(&mut self, index: usize, measure: StagedMeasure) -> Result<(), RegistryError> {
        if index >= self.roots.len() {
            return Err(RegistryError::NotReserved { index });
        }
        match &self.roots[index] {
            RootSlot::Reserved => {
                self.roots[index] = RootSlot::Measure(measure);
                Ok(())
            }
            RootSlot::Measure(_) => Err(RegistryError::AlreadyFilled { index }),
        }
    }

    /// Root indices that currently hold a measure.
    pub fn filled_roots(&self) -> Vec<usize> {
        self.roots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| matches!(s, RootSlot::Measure(_)).then_some(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::{all_up_to, bs};
    use crate::measure::Schedule;
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    fn small_registry() -> Registry {
        Registry::new(
            alloc::vec![
                StagedMeasure::uniform(Schedule::instant()),
                StagedMeasure::bernoulli(dy(3, 2), Schedule::instant()),
            ],
            1,
        )
    }

    #[test]
    fn padding_is_increasing_and_equivalent() {
        let reg = small_registry();
        for i in 0..=10usize {
            for j in 0..10usize {
                assert!(reg.pad(i, j) < reg.pad(i, j + 1));
            }
        }
        for i in 0..reg.base_count() {
            for j in 0..=10usize {
                let p = reg.pad(i, j);
                for sigma in all_up_to(8) {
                    assert_eq!(reg.eval(p, &sigma, 0), reg.eval(i, &sigma, 0));
                }
            }
        }
    }

    #[test]
    fn pad_above_bounds() {
        let reg = small_registry();
        for bound in [0usize, 1, 2, 3, 7, 50, 301] {
            let p = reg.pad_above(1, bound);
            assert!(p > bound);
            assert_eq!(reg.resolve(p), 1);
        }
    }

    #[test]
    fn reserved_slots() {
        let mut reg = small_registry();
        let idx = reg.reserve().unwrap();
        assert_eq!(idx, 2);
        assert_eq!(reg.eval(idx, &bs("0"), 1000), Ok(None));
        assert!(!reg.is_total(idx));
        reg.fill(idx, StagedMeasure::uniform(Schedule::instant())).unwrap();
        assert_eq!(reg.eval(idx, &bs("0"), 0), Ok(Some(dy(1, 1))));
        assert_eq!(
            reg.fill(idx, StagedMeasure::uniform(Schedule::instant())),
            Err(RegistryError::AlreadyFilled { index: idx })
        );
        assert_eq!(reg.reserve(), Err(RegistryError::NoFreeSlot));
    }

    #[test]
    fn empty_registry_is_an_error() {
        let reg = Registry::new(alloc::vec![], 0);
        assert!(matches!(
            reg.eval(0, &BinStr::empty(), 0),
            Err(RegistryError::UnknownIndex { .. })
        ));
    }
}
