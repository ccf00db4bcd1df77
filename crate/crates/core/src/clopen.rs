//! Clopen tests, uniform test families, and the weight-accounted
//! compressor that converts late test membership into high deficiency.
//!
//! A clopen test for measure `e` is a partial sequence `j ↦ D_j` of finite
//! string sets with `μ_e(D_j) ≤ 2^{-j}`. Families emitted by the stage
//! construction keep their members intensional (a cover at a stage);
//! explicit sets are used for hand-built tests.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::format;
use core::fmt;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;
use crate::machine::{RequestOutcome, UniversalMachine};
use crate::measure::ConstructedLaw;
use crate::registry::Registry;

/// One member of a clopen test.
#[derive(Clone, Debug)]
pub struct TestMember {
    pub set: MemberSet,
    /// Construction stage at which the member was assigned.
    pub assigned_stage: u64,
    /// Exact owner-measure value of the member at assignment time.
    pub mu_at_assignment: Dyadic,
}

#[derive(Clone, Debug)]
pub enum MemberSet {
    Explicit(Vec<BinStr>),
    /// The cover `C_stage` of a constructed law.
    Cover { law: Arc<ConstructedLaw>, stage: u64 },
}

impl MemberSet {
    /// Enumerates the member if it has at most `cap` strings.
    pub fn enumerate(&self, cap: u64) -> Option<Vec<BinStr>> {
        match self {
            MemberSet::Explicit(v) => (v.len() as u64 <= cap).then(|| v.clone()),
            MemberSet::Cover { law, stage } => law.enumerate_cover(*stage, cap),
        }
    }

    pub fn contains(&self, sigma: &BinStr) -> bool {
        match self {
            MemberSet::Explicit(v) => v.contains(sigma),
            MemberSet::Cover { law, stage } => {
                sigma.len() == *stage && law.cover_contains(sigma)
            }
        }
    }
}

/// A clopen test owned by registry index `e`. Definedness is downward
/// closed by construction: members are stored densely from index 0.
#[derive(Clone, Debug)]
pub struct ClopenTest {
    pub owner: usize,
    pub members: Vec<TestMember>,
}

impl ClopenTest {
    pub fn new(owner: usize) -> Self {
        ClopenTest { owner, members: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, j: u64) -> Option<&TestMember> {
        self.members.get(j as usize)
    }
}

/// A violated clopen-test invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TestViolation {
    /// `μ_e(D_j)` undefined at the checked stage.
    Undefined { j: usize },
    /// `μ_e(D_j) > 2^{-j}`.
    MassBound { j: usize, mass: Dyadic },
    /// The stored assignment value disagrees with recomputation.
    StaleMass { j: usize },
}

impl fmt::Display for TestViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestViolation::Undefined { j } => write!(f, "member {j}: owner measure undefined"),
            TestViolation::MassBound { j, mass } => {
                write!(f, "member {j}: mass {mass} exceeds 2^-{j}")
            }
            TestViolation::StaleMass { j } => write!(f, "member {j}: stored mass is stale"),
        }
    }
}

/// Checks every test invariant at stage `s`: definedness of the owner
/// measure on each member and the `2^{-j}` mass bounds. An empty report
/// means the test is valid.
pub fn validate_clopen_test(
    registry: &Registry,
    test: &ClopenTest,
    stage: u64,
    enum_cap: u64,
) -> Vec<TestViolation> {
    let mut out = Vec::new();
    for (j, member) in test.members.iter().enumerate() {
        let mass = match member_mass(registry, test.owner, member, stage, enum_cap) {
            Some(m) => m,
            None => {
                out.push(TestViolation::Undefined { j });
                continue;
            }
        };
        if mass != member.mu_at_assignment {
            out.push(TestViolation::StaleMass { j });
        }
        if mass > Dyadic::two_pow_neg(j as u64) {
            out.push(TestViolation::MassBound { j, mass });
        }
    }
    out
}

fn member_mass(
    registry: &Registry,
    owner: usize,
    member: &TestMember,
    stage: u64,
    enum_cap: u64,
) -> Option<Dyadic> {
    match member.set.enumerate(enum_cap) {
        Some(strings) => {
            let mut acc = Dyadic::zero();
            for s in &strings {
                acc = acc.add(&registry.eval(owner, s, stage).ok()??);
            }
            Some(acc)
        }
        // Too large to enumerate: trust the assignment value, but insist the
        // owner is defined at the member's length by the checked stage.
        None => {
            let len = match &member.set {
                MemberSet::Cover { stage, .. } => *stage,
                MemberSet::Explicit(v) => v.iter().map(|s| s.len()).max().unwrap_or(0),
            };
            registry
                .measure(owner)?
                .schedule
                .defined_at(len, stage)
                .then(|| member.mu_at_assignment.clone())
        }
    }
}

/// A uniform sequence of clopen tests: one test per family position.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub tests: Vec<ClopenTest>,
}

impl TestFamily {
    pub fn test_for(&self, owner: usize) -> Option<&ClopenTest> {
        self.tests.iter().find(|t| t.owner == owner)
    }
}

/// The namespace of uniform test families, with two-phase reservation so a
/// construction can use its own family index before emitting the family.
#[derive(Debug, Default)]
pub struct FamilySpace {
    slots: Vec<Option<TestFamily>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyError {
    AlreadyFilled { index: usize },
    NotReserved { index: usize },
}

impl fmt::Display for FamilyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyError::AlreadyFilled { index } => {
                write!(f, "test family index {index} already filled")
            }
            FamilyError::NotReserved { index } => {
                write!(f, "test family index {index} was never reserved")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FamilyError {}

impl FamilySpace {
    pub fn new() -> Self {
        FamilySpace { slots: Vec::new() }
    }

    pub fn reserve(&mut self) -> usize {
        self.slots.push(None);
        self.slots.len() - 1
    }

    pub fn fill(&mut self, index: usize, family: TestFamily) -> Result<(), FamilyError> {
        match self.slots.get_mut(index) {
            None => Err(FamilyError::NotReserved { index }),
            Some(slot @ None) => {
                *slot = Some(family);
                Ok(())
            }
            Some(Some(_)) => Err(FamilyError::AlreadyFilled { index }),
        }
    }

    pub fn get(&self, index: usize) -> Option<&TestFamily> {
        self.slots.get(index)?.as_ref()
    }
}

/// `q(t, e, k) = t + e + k + x + 5`, where `x` is the compressor machine's
/// coding constant.
pub fn q(t: usize, e: usize, k: u64, x: u64) -> u64 {
    t as u64 + e as u64 + k + x + 5
}

/// What a compressor invocation did.
#[derive(Clone, Debug)]
pub struct CompressorOutcome {
    pub t: usize,
    pub e: usize,
    pub k: u64,
    pub target_member: u64,
    /// False when the targeted member never converged, in which case the
    /// machine state is untouched.
    pub fired: bool,
    pub requests: Vec<(BinStr, u64)>,
    pub weight_added: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompressorError {
    MemberTooLarge { t: usize, e: usize, member: u64 },
    RequestRejected { sigma: String },
}

impl fmt::Display for CompressorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompressorError::MemberTooLarge { t, e, member } => {
                write!(f, "family {t}, test {e}: member {member} too large to enumerate")
            }
            CompressorError::RequestRejected { sigma } => {
                write!(f, "compression request for {sigma} rejected by Kraft guard")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CompressorError {}

/// Runs the compressor for `(t, e, k)`: if member `q(t,e,k)` of the family's
/// test for `e` is assigned, every string in it is compressed to codelength
/// `⌈-log2 μ_e(σ)⌉ - k - x` (clamped at zero), after which `d_e(σ) ≥ k` at
/// all later stages. A member that never converged simply does not fire.
pub fn compressor_run(
    registry: &Registry,
    universal: &mut UniversalMachine,
    machine_idx: usize,
    family: &TestFamily,
    t: usize,
    e: usize,
    k: u64,
    enum_cap: u64,
) -> Result<CompressorOutcome, CompressorError> {
    let x = universal.machine(machine_idx).constant;
    let target = q(t, e, k, x);
    let mut outcome = CompressorOutcome {
        t,
        e,
        k,
        target_member: target,
        fired: false,
        requests: Vec::new(),
        weight_added: Dyadic::zero(),
    };
    let member = match family.test_for(e).and_then(|test| test.member(target)) {
        Some(m) => m.clone(),
        None => return Ok(outcome),
    };
    let strings = member
        .set
        .enumerate(enum_cap)
        .ok_or(CompressorError::MemberTooLarge { t, e, member: target })?;
    outcome.fired = true;
    let before = universal.machine(machine_idx).weight().clone();
    for sigma in strings {
        let mu = registry.eval_final(e, &sigma).unwrap_or(None).unwrap_or_else(Dyadic::zero);
        let ideal = mu.ceil_neg_log2().unwrap_or(0).max(0) as u64;
        let codelength = ideal.saturating_sub(k + x);
        let res = universal.machine_mut(machine_idx).request(
            sigma.clone(),
            codelength,
            member.assigned_stage,
        );
        if res == RequestOutcome::Rejected {
            return Err(CompressorError::RequestRejected { sigma: format!("{sigma}") });
        }
        outcome.requests.push((sigma, codelength));
    }
    outcome.weight_added = universal.machine(machine_idx).weight().sub(&before);
    Ok(outcome)
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
        Registry::new(vec![StagedMeasure::uniform(Schedule::instant())], 0)
    }

    fn explicit_member(strings: Vec<BinStr>, mu: Dyadic) -> TestMember {
        TestMember { set: MemberSet::Explicit(strings), assigned_stage: 0, mu_at_assignment: mu }
    }

    #[test]
    fn q_arithmetic() {
        assert_eq!(q(0, 1, 2, 7), 15);
    }

    #[test]
    fn empty_test_is_valid() {
        let test = ClopenTest::new(0);
        assert!(validate_clopen_test(&reg(), &test, 0, 1024).is_empty());
    }

    #[test]
    fn mass_bounds() {
        let mut test = ClopenTest::new(0);
        test.members.push(explicit_member(vec![bs("0"), bs("1")], Dyadic::one()));
        test.members.push(explicit_member(vec![bs("00"), bs("01")], dy(1, 1)));
        assert!(validate_clopen_test(&reg(), &test, 0, 1024).is_empty());

        let mut bad = ClopenTest::new(0);
        bad.members.push(explicit_member(vec![bs("0"), bs("1")], Dyadic::one()));
        bad.members.push(explicit_member(vec![bs("0")], dy(1, 1)));
        bad.members.push(explicit_member(vec![bs("000"), bs("001"), bs("010")], dy(3, 3)));
        let violations = validate_clopen_test(&reg(), &bad, 0, 1024);
        assert_eq!(violations.len(), 1);
        assert!(matches!(violations[0], TestViolation::MassBound { j: 2, .. }));
    }

    #[test]
    fn family_reservation_cycle() {
        let mut space = FamilySpace::new();
        let t = space.reserve();
        assert_eq!(t, 0);
        assert!(space.get(t).is_none());
        space.fill(t, TestFamily { tests: vec![] }).unwrap();
        assert!(space.get(t).is_some());
        assert_eq!(
            space.fill(t, TestFamily { tests: vec![] }),
            Err(FamilyError::AlreadyFilled { index: t })
        );
        assert_eq!(
            space.fill(9, TestFamily { tests: vec![] }),
            Err(FamilyError::NotReserved { index: 9 })
        );
    }
}
