//! Staged partial measure programs.
//!
//! A measure representation maps strings to dyadic values with
//! `μ(ε) = 1` and `μ(σ) = μ(σ0) + μ(σ1)`. A [`StagedMeasure`] pairs a value
//! law with an explicit [`Schedule`] saying at which stage the values on
//! `2^{≤n}` become defined, so partiality is scripted and reproducible
//! rather than emergent.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;
use crate::func::IntFn;

/// Maps a string length to the first stage at which all values on `2^{≤n}`
/// are defined. Lengths beyond `total_upto` are never defined.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub stage_fn: IntFn,
    /// `None` means total: every length converges at some finite stage.
    pub total_upto: Option<u64>,
}

impl Schedule {
    pub fn instant() -> Self {
        Schedule { stage_fn: IntFn::Const(0), total_upto: None }
    }

    pub fn linear() -> Self {
        Schedule { stage_fn: IntFn::Linear { a: 1, b: 0 }, total_upto: None }
    }

    /// First stage at which `2^{≤n}` is fully defined, `None` if never.
    pub fn stage_for(&self, n: u64) -> Option<u64> {
        match self.total_upto {
            Some(upto) if n > upto => None,
            _ => Some(self.stage_fn.eval(n)),
        }
    }

    pub fn is_total(&self) -> bool {
        self.total_upto.is_none()
    }

    pub fn defined_at(&self, n: u64, stage: u64) -> bool {
        matches!(self.stage_for(n), Some(s) if s <= stage)
    }
}

/// How a finite conditional table extends beyond its explicit depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeExtend {
    /// No values beyond the table.
    Undefined,
    /// Split every deeper node evenly.
    HalfSplit,
}

/// One pruning level of a constructed measure: at stage `stage` the cover
/// kept a single child under each member, and mass followed the kept child.
#[derive(Clone, Debug)]
pub struct ActiveLevel {
    pub stage: u64,
    pub acting_index: usize,
    pub kept: KeptRule,
}

/// Which child the cover kept at an active level.
#[derive(Clone, Debug)]
pub enum KeptRule {
    /// The kept bit is the same under every cover member.
    Bit(bool),
    /// Kept bit per cover member (keyed by the member's parent string).
    Table(BTreeMap<BinStr, bool>),
}

/// The measure produced by the stage construction, represented by its
/// active levels. Values are evaluated by walking prefixes: quiet levels
/// halve, active levels keep full mass on the kept child and zero on the
/// other. Defined up to `horizon` only.
#[derive(Clone, Debug)]
pub struct ConstructedLaw {
    levels: Vec<ActiveLevel>,
    horizon: u64,
}

impl ConstructedLaw {
    pub fn new(levels: Vec<ActiveLevel>, horizon: u64) -> Self {
        ConstructedLaw { levels, horizon }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn active_stages(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.stage).collect()
    }

    pub fn levels(&self) -> &[ActiveLevel] {
        &self.levels
    }

    fn level_at(&self, stage: u64) -> Option<&ActiveLevel> {
        self.levels.iter().find(|l| l.stage == stage)
    }

    /// Kept bit at an active level under cover member parent `p`.
    fn kept_bit(&self, level: &ActiveLevel, parent: &BinStr) -> bool {
        match &level.kept {
            KeptRule::Bit(b) => *b,
            KeptRule::Table(t) => *t.get(parent).expect("cover member missing from kept table"),
        }
    }

    pub fn value(&self, sigma: &BinStr) -> Option<Dyadic> {
        if sigma.len() > self.horizon {
            return None;
        }
        // A string either follows every kept branch (and only quiet levels
        // halve it) or carries zero mass from the level where it dropped.
        let mut halvings: u64 = 0;
        for l in 1..=sigma.len() {
            match self.level_at(l) {
                Some(level) => {
                    let keep = self.kept_bit(level, &sigma.prefix(l - 1));
                    if sigma.bit(l - 1) != keep {
                        return Some(Dyadic::zero());
                    }
                }
                None => halvings += 1,
            }
        }
        Some(Dyadic::two_pow_neg(halvings))
    }

    /// Whether `σ` (of length `s`) belongs to the cover `C_s`.
    pub fn cover_contains(&self, sigma: &BinStr) -> bool {
        for l in 1..=sigma.len() {
            if let Some(level) = self.level_at(l) {
                let keep = self.kept_bit(level, &sigma.prefix(l - 1));
                if sigma.bit(l - 1) != keep {
                    return false;
                }
            }
        }
        true
    }

    /// Number of active stages up to and including `s`.
    pub fn actives_up_to(&self, s: u64) -> u64 {
        self.levels.iter().filter(|l| l.stage <= s).count() as u64
    }

    /// `log2 |C_s|`; the cover doubles at quiet levels and is pruned back to
    /// one child per member at active ones.
    pub fn cover_size_log2(&self, s: u64) -> u64 {
        s - self.actives_up_to(s)
    }

    /// λ-mass of each member of `C_s` (all members carry the same mass).
    pub fn per_member_mass(&self, s: u64) -> Dyadic {
        Dyadic::two_pow_neg(self.cover_size_log2(s))
    }

    /// Exact λ-mass of the cover at stage `s`: `|C_s| · 2^{-log2|C_s|}`.
    pub fn cover_mass(&self, s: u64) -> Dyadic {
        let log = self.cover_size_log2(s);
        let count = num_bigint::BigInt::from(1u8) << log;
        Dyadic::new(count, 0).mul(&Dyadic::two_pow_neg(log))
    }

    /// Walk the cover along kept branches choosing `bit_chooser` at quiet
    /// levels; used to spot-check member values without enumerating `C_s`.
    pub fn cover_member(&self, s: u64, mut bit_chooser: impl FnMut(u64) -> bool) -> BinStr {
        let mut cur = BinStr::empty();
        for l in 1..=s {
            let bit = match self.level_at(l) {
                Some(level) => self.kept_bit(level, &cur),
                None => bit_chooser(l),
            };
            cur = cur.child(bit);
        }
        cur
    }

    /// Enumerate `C_s` if it has at most `cap` members.
    pub fn enumerate_cover(&self, s: u64, cap: u64) -> Option<Vec<BinStr>> {
        let log = self.cover_size_log2(s);
        if log >= 63 || (1u64 << log) > cap {
            return None;
        }
        let mut frontier = vec![BinStr::empty()];
        for l in 1..=s {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            match self.level_at(l) {
                Some(level) => {
                    for p in &frontier {
                        let keep = self.kept_bit(level, p);
                        next.push(p.child(keep));
                    }
                }
                None => {
                    for p in &frontier {
                        next.push(p.child(false));
                        next.push(p.child(true));
                    }
                }
            }
            frontier = next;
        }
        Some(frontier)
    }
}

/// The value law of a measure program.
#[derive(Clone, Debug)]
pub enum MeasureKind {
    Uniform,
    /// Conditional probability of a `1` at every node.
    Bernoulli(Dyadic),
    /// Explicit absolute values up to `depth`; may deliberately violate the
    /// measure laws so validation has something to catch.
    FiniteTree { nodes: BTreeMap<BinStr, Dyadic>, depth: u64, extend: TreeExtend },
    Mixture(Vec<(Dyadic, MeasureKind)>),
    Constructed(Arc<ConstructedLaw>),
}

impl MeasureKind {
    /// Mathematical value, ignoring the schedule. `None` where the law has
    /// no value at all (sparse tables, beyond a constructed horizon).
    pub fn raw_value(&self, sigma: &BinStr) -> Option<Dyadic> {
        match self {
            MeasureKind::Uniform => Some(Dyadic::two_pow_neg(sigma.len())),
            MeasureKind::Bernoulli(q) => {
                let ones = sigma.count_ones();
                let zeros = sigma.len() - ones;
                Some(q.pow(ones).mul(&q.complement().pow(zeros)))
            }
            MeasureKind::FiniteTree { nodes, depth, extend } => {
                if sigma.len() <= *depth {
                    nodes.get(sigma).cloned()
                } else {
                    match extend {
                        TreeExtend::Undefined => None,
                        TreeExtend::HalfSplit => {
                            let base = nodes.get(&sigma.prefix(*depth))?;
                            Some(base.mul(&Dyadic::two_pow_neg(sigma.len() - depth)))
                        }
                    }
                }
            }
            MeasureKind::Mixture(parts) => {
                let mut acc = Dyadic::zero();
                for (w, kind) in parts {
                    acc = acc.add(&w.mul(&kind.raw_value(sigma)?));
                }
                Some(acc)
            }
            MeasureKind::Constructed(law) => law.value(sigma),
        }
    }
}

/// A measure program with scripted stage behavior.
#[derive(Clone, Debug)]
pub struct StagedMeasure {
    pub kind: MeasureKind,
    pub schedule: Schedule,
}

impl StagedMeasure {
    pub fn uniform(schedule: Schedule) -> Self {
        StagedMeasure { kind: MeasureKind::Uniform, schedule }
    }

    pub fn bernoulli(q: Dyadic, schedule: Schedule) -> Self {
        StagedMeasure { kind: MeasureKind::Bernoulli(q), schedule }
    }

    /// `μ(σ)[s]`: the value if defined at stage `s`, `None` otherwise.
    pub fn eval(&self, sigma: &BinStr, stage: u64) -> Option<Dyadic> {
        if !self.schedule.defined_at(sigma.len(), stage) {
            return None;
        }
        self.kind.raw_value(sigma)
    }

    /// The value at any sufficiently late finite stage.
    pub fn eval_final(&self, sigma: &BinStr) -> Option<Dyadic> {
        self.schedule.stage_for(sigma.len())?;
        self.kind.raw_value(sigma)
    }

    /// Least stage at which all of `2^{≤n}` is defined.
    pub fn time_complexity(&self, n: u64) -> Option<u64> {
        self.schedule.stage_for(n)
    }

    pub fn is_total(&self) -> bool {
        self.schedule.is_total()
    }

    /// Whether the time-complexity exceeds `h` on every length in `range`;
    /// an undefined entry counts as exceeding.
    pub fn time_complexity_dominates(&self, h: &IntFn, range: impl Iterator<Item = u64>) -> bool {
        for n in range {
            match self.time_complexity(n) {
                None => continue,
                Some(tc) if tc > h.eval(n) => continue,
                Some(_) => return false,
            }
        }
        true
    }
}

/// A violated measure-representation law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `μ(ε) ≠ 1`.
    RootLaw { value: Option<Dyadic> },
    /// `μ(σ) ≠ μ(σ0) + μ(σ1)` with all three defined.
    Additivity { sigma: BinStr },
    /// A child is defined while the parent or a shorter string is not.
    LengthClosure { sigma: BinStr },
    /// A value is negative.
    Negative { sigma: BinStr },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootLaw { value } => match value {
                Some(v) => write!(f, "root law: μ(ε) = {v} ≠ 1"),
                None => write!(f, "root law: μ(ε) undefined while other values are defined"),
            },
            Violation::Additivity { sigma } => write!(f, "additivity violated at {sigma}"),
            Violation::LengthClosure { sigma } => {
                write!(f, "length closure violated at {sigma}")
            }
            Violation::Negative { sigma } => write!(f, "negative value at {sigma}"),
        }
    }
}

/// Outcome of [`validate_measure`]; empty iff the representation laws hold
/// on the checked rectangle.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks root law, additivity, length closure, and non-negativity over
/// `2^{≤max_len}` at stage `s`. Violations are report entries, not errors.
pub fn validate_measure(measure: &StagedMeasure, max_len: u64, stage: u64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let root = measure.eval(&BinStr::empty(), stage);
    let mut any_defined = root.is_some();

    let mut defined_by_len: Vec<bool> = Vec::new();
    for len in 0..=max_len {
        let mut all_defined = true;
        for sigma in strings_of(len) {
            let v = measure.eval(&sigma, stage);
            match &v {
                Some(value) => {
                    any_defined = true;
                    if value.is_negative() {
                        report.violations.push(Violation::Negative { sigma: sigma.clone() });
                    }
                }
                None => all_defined = false,
            }
            if len < max_len {
                let c0 = measure.eval(&sigma.child(false), stage);
                let c1 = measure.eval(&sigma.child(true), stage);
                if let (Some(a), Some(b)) = (&c0, &c1) {
                    match &v {
                        Some(value) => {
                            if *value != a.add(b) {
                                report.violations.push(Violation::Additivity { sigma: sigma.clone() });
                            }
                        }
                        None => {
                            report.violations.push(Violation::LengthClosure { sigma: sigma.clone() })
                        }
                    }
                }
            }
        }
        defined_by_len.push(all_defined);
    }

    // Length closure across levels: a fully defined level must not sit above
    // a partially defined shorter one.
    for len in 1..defined_by_len.len() {
        if defined_by_len[len] && !defined_by_len[len - 1] {
            report.violations.push(Violation::LengthClosure {
                sigma: BinStr::all_of_length(len as u64).next().unwrap(),
            });
        }
    }

    match root {
        Some(v) if !v.is_one() => report.violations.insert(0, Violation::RootLaw { value: Some(v) }),
        None if any_defined => report.violations.insert(0, Violation::RootLaw { value: None }),
        _ => {}
    }
    report
}

fn strings_of(len: u64) -> Vec<BinStr> {
    BinStr::all_of_length(len).collect()
}

/// Errors from set-measure and comparison operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeasureError {
    NotPrefixFree,
    UndefinedInRange { sigma: BinStr },
    RangeTooLarge { limit: u64 },
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::NotPrefixFree => write!(f, "set is not prefix-free"),
            MeasureError::UndefinedInRange { sigma } => {
                write!(f, "measure undefined at {sigma} in the requested range")
            }
            MeasureError::RangeTooLarge { limit } => {
                write!(f, "string enumeration exceeds the guard of 2^{limit}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MeasureError {}

/// `μ(D)[s]` for a prefix-free `D`: the exact sum if every member is
/// defined, `None` if any member is still undefined at `s`.
pub fn measure_of_set(
    measure: &StagedMeasure,
    set: &[BinStr],
    stage: u64,
) -> Result<Option<Dyadic>, MeasureError> {
    if !BinStr::is_prefix_free(set) {
        return Err(MeasureError::NotPrefixFree);
    }
    let mut acc = Dyadic::zero();
    for sigma in set {
        match measure.eval(sigma, stage) {
            Some(v) => acc = acc.add(&v),
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Removes members that have a proper prefix in the set, leaving a
/// prefix-free set covering the same reals.
pub fn prefix_free_reduce(set: &[BinStr]) -> Vec<BinStr> {
    let mut sorted: Vec<BinStr> = set.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out: Vec<BinStr> = Vec::new();
    'outer: for s in sorted {
        for kept in &out {
            if kept.is_prefix_of(&s) {
                continue 'outer;
            }
        }
        out.push(s);
    }
    out
}

const ENUM_GUARD: u64 = 22;

/// Whether two measures have identical conditional branching on every string
/// with length in `[a, b)`. Cross-multiplied, so no division is needed:
/// `μ(σj)·ν(σ) = ν(σj)·μ(σ)`.
pub fn relatively_identical(
    m1: &StagedMeasure,
    m2: &StagedMeasure,
    a: u64,
    b: u64,
    stage: u64,
) -> Result<bool, MeasureError> {
    if b > ENUM_GUARD {
        return Err(MeasureError::RangeTooLarge { limit: ENUM_GUARD });
    }
    for len in a..b {
        for sigma in BinStr::all_of_length(len) {
            let p1 = m1.eval(&sigma, stage).ok_or(MeasureError::UndefinedInRange { sigma: sigma.clone() })?;
            let p2 = m2.eval(&sigma, stage).ok_or(MeasureError::UndefinedInRange { sigma: sigma.clone() })?;
            for bit in [false, true] {
                let c = sigma.child(bit);
                let c1 = m1.eval(&c, stage).ok_or(MeasureError::UndefinedInRange { sigma: c.clone() })?;
                let c2 = m2.eval(&c, stage).ok_or(MeasureError::UndefinedInRange { sigma: c.clone() })?;
                if c1.mul(&p2) != c2.mul(&p1) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Result of a sparsity check: the deviation lengths found and whether they
/// form a `p`-sparse witness.
#[derive(Clone, Debug)]
pub struct SparsityWitness {
    pub sparse: bool,
    pub witness: Vec<u64>,
}

/// Whether the measure is relatively identical to the uniform measure except
/// at a `p`-sparse set of lengths within `max_len`. The witness lists the
/// deviation lengths (`[0]` when the measure never deviates).
pub fn is_p_sparse(
    measure: &StagedMeasure,
    p: &IntFn,
    max_len: u64,
) -> Result<SparsityWitness, MeasureError> {
    if max_len > ENUM_GUARD {
        return Err(MeasureError::RangeTooLarge { limit: ENUM_GUARD });
    }
    let uniform = StagedMeasure::uniform(Schedule::instant());
    let mut deviations: Vec<u64> = Vec::new();
    for len in 0..max_len {
        let mut deviates = false;
        for sigma in BinStr::all_of_length(len) {
            let pv = measure
                .eval_final(&sigma)
                .ok_or(MeasureError::UndefinedInRange { sigma: sigma.clone() })?;
            for bit in [false, true] {
                let c = sigma.child(bit);
                let cv = measure
                    .eval_final(&c)
                    .ok_or(MeasureError::UndefinedInRange { sigma: c.clone() })?;
                let u = uniform.eval_final(&sigma).unwrap();
                let uc = uniform.eval_final(&c).unwrap();
                if cv.mul(&u) != uc.mul(&pv) {
                    deviates = true;
                }
            }
        }
        if deviates {
            deviations.push(len + 1);
        }
    }
    if deviations.is_empty() {
        return Ok(SparsityWitness { sparse: true, witness: vec![0] });
    }
    let mut sparse = true;
    for w in deviations.windows(2) {
        if p.eval(w[0]) >= w[1] {
            sparse = false;
        }
    }
    Ok(SparsityWitness { sparse, witness: deviations })
}

/// Human-readable location string for harness error reporting.
pub fn describe_sigma(sigma: &BinStr) -> String {
    format!("σ={sigma}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::bs;
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    #[test]
    fn uniform_values() {
        let m = StagedMeasure::uniform(Schedule::instant());
        assert_eq!(m.eval(&bs("010"), 0), Some(dy(1, 3)));
        assert_eq!(m.eval(&BinStr::empty(), 0), Some(Dyadic::one()));
    }

    #[test]
    fn bernoulli_values() {
        let m = StagedMeasure::bernoulli(dy(3, 2), Schedule::instant());
        assert_eq!(m.eval(&bs("11"), 0), Some(dy(9, 4)));
        assert_eq!(m.eval(&bs("10"), 0), Some(dy(3, 4)));
    }

    #[test]
    fn delayed_schedule() {
        let m = StagedMeasure::uniform(Schedule {
            stage_fn: IntFn::Exp { base: 2, scale: 1, offset: 0 },
            total_upto: None,
        });
        assert_eq!(m.eval(&bs("0101"), 10), None);
        assert_eq!(m.eval(&bs("0101"), 16), Some(dy(1, 4)));
    }

    #[test]
    fn stage_monotone() {
        let m = StagedMeasure::uniform(Schedule::linear());
        let s = bs("01");
        let v2 = m.eval(&s, 2);
        assert!(v2.is_some());
        for t in 3..10 {
            assert_eq!(m.eval(&s, t), v2);
        }
    }

    #[test]
    fn validate_good_measures() {
        assert!(validate_measure(&StagedMeasure::uniform(Schedule::instant()), 6, 0).is_valid());
        let mix = StagedMeasure {
            kind: MeasureKind::Mixture(vec![
                (dy(1, 1), MeasureKind::Uniform),
                (dy(1, 1), MeasureKind::Bernoulli(dy(1, 2))),
            ]),
            schedule: Schedule::instant(),
        };
        assert!(validate_measure(&mix, 8, 0).is_valid());
    }

    #[test]
    fn validate_bad_table() {
        let mut nodes = BTreeMap::new();
        nodes.insert(BinStr::empty(), Dyadic::one());
        nodes.insert(bs("0"), dy(1, 1));
        nodes.insert(bs("1"), dy(1, 2));
        let m = StagedMeasure {
            kind: MeasureKind::FiniteTree { nodes, depth: 1, extend: TreeExtend::Undefined },
            schedule: Schedule { stage_fn: IntFn::Const(0), total_upto: Some(1) },
        };
        let report = validate_measure(&m, 1, 0);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Additivity { sigma } if sigma.is_empty())));
    }

    #[test]
    fn set_measures() {
        let uniform = StagedMeasure::uniform(Schedule::instant());
        let full = [bs("00"), bs("01"), bs("1")];
        assert_eq!(measure_of_set(&uniform, &full, 0), Ok(Some(Dyadic::one())));
        assert_eq!(
            measure_of_set(&uniform, &[bs("0"), bs("01")], 0),
            Err(MeasureError::NotPrefixFree)
        );
        let bern = StagedMeasure::bernoulli(dy(3, 2), Schedule::instant());
        assert_eq!(measure_of_set(&bern, &[bs("00"), bs("11")], 0), Ok(Some(dy(5, 3))));
    }

    #[test]
    fn partitions_sum_to_one() {
        let bern = StagedMeasure::bernoulli(dy(3, 2), Schedule::instant());
        for n in 0..=6 {
            let level: Vec<_> = BinStr::all_of_length(n).collect();
            assert_eq!(measure_of_set(&bern, &level, 0), Ok(Some(Dyadic::one())));
        }
    }

    #[test]
    fn relative_identity() {
        let u = StagedMeasure::uniform(Schedule::instant());
        let b = StagedMeasure::bernoulli(dy(3, 2), Schedule::instant());
        assert_eq!(relatively_identical(&u, &u, 0, 10, 0), Ok(true));
        assert_eq!(relatively_identical(&u, &b, 0, 1, 0), Ok(false));
    }

    #[test]
    fn sparsity() {
        let u = StagedMeasure::uniform(Schedule::instant());
        let w = is_p_sparse(&u, &IntFn::Linear { a: 1, b: 1 }, 8).unwrap();
        assert!(w.sparse);
        assert_eq!(w.witness, vec![0]);

        let b = StagedMeasure::bernoulli(dy(3, 2), Schedule::instant());
        let w = is_p_sparse(&b, &IntFn::Linear { a: 1, b: 1 }, 6).unwrap();
        assert!(!w.sparse);
    }

    #[test]
    fn time_complexity_and_domination() {
        let fast = StagedMeasure::uniform(Schedule::instant());
        assert_eq!(fast.time_complexity(5), Some(0));
        let partial = StagedMeasure {
            kind: MeasureKind::Uniform,
            schedule: Schedule { stage_fn: IntFn::Const(0), total_upto: Some(3) },
        };
        assert_eq!(partial.time_complexity(4), None);
        let slow = StagedMeasure::uniform(Schedule {
            stage_fn: IntFn::Exp { base: 2, scale: 1, offset: 0 },
            total_upto: None,
        });
        let h = IntFn::Poly(vec![0, 0, 1]);
        // Strictly above n^2 from n = 5 on (they tie at n = 4).
        assert!(slow.time_complexity_dominates(&h, 5..13));
        assert!(!slow.time_complexity_dominates(&h, 4..13));
        assert!(!fast.time_complexity_dominates(&h, 5..13));
        assert!(partial.time_complexity_dominates(&h, 5..13));
    }

    #[test]
    fn constructed_law_walk() {
        // One active level at stage 1 keeping the 1-child everywhere.
        let law = ConstructedLaw::new(
            vec![ActiveLevel { stage: 1, acting_index: 0, kept: KeptRule::Bit(true) }],
            6,
        );
        assert_eq!(law.value(&bs("1")), Some(Dyadic::one()));
        assert_eq!(law.value(&bs("0")), Some(Dyadic::zero()));
        assert_eq!(law.value(&bs("10")), Some(dy(1, 1)));
        assert_eq!(law.value(&bs("01")), Some(Dyadic::zero()));
        assert!(law.cover_contains(&bs("11")));
        assert!(!law.cover_contains(&bs("01")));
        assert_eq!(law.cover_mass(5), Dyadic::one());
        assert_eq!(law.enumerate_cover(2, 16).unwrap(), vec![bs("10"), bs("11")]);
        let m = StagedMeasure {
            kind: MeasureKind::Constructed(Arc::new(law)),
            schedule: Schedule { stage_fn: IntFn::Linear { a: 1, b: 0 }, total_upto: Some(6) },
        };
        assert!(validate_measure(&m, 5, 10).is_valid());
    }

    #[test]
    fn prefix_free_reduction() {
        let set = [bs("01"), bs("010"), bs("1"), bs("11")];
        assert_eq!(prefix_free_reduce(&set), vec![bs("01"), bs("1")]);
    }
}
