//! The stage construction of a sparse measure: nested covers `C_s`, a
//! measure that follows them, and one clopen test per family member whose
//! members are covers captured at acting stages.
//!
//! At a quiet stage the cover extends both children and the measure halves.
//! When an index receives attention the cover keeps, under each member, the
//! child of smaller acting-measure mass (ties keep the 1-child), the
//! measure transfers whole, and the next member of that index's test is
//! assigned. An acting stage suspends every stage in `(s, p(s)]`, which
//! keeps the active stages `p`-sparse.
//!
//! Covers are never materialized when every family member is a uniform or
//! Bernoulli law: the kept bit is then the same under every cover member,
//! cover sizes are powers of two, and each `μ_e(C_s)` evolves by a closed
//! per-stage factor. Other families fall back to explicit covers under a
//! hard cap.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::binstr::BinStr;
use crate::clopen::{
    compressor_run, ClopenTest, CompressorError, CompressorOutcome, FamilyError, FamilySpace,
    MemberSet, TestFamily, TestMember,
};
use crate::deficiency::{stream_deficiency, DeficiencyValue};
use crate::dyadic::Dyadic;
use crate::func::IntFn;
use crate::machine::UniversalMachine;
use crate::measure::{ActiveLevel, ConstructedLaw, KeptRule, MeasureKind, Schedule, StagedMeasure};
use crate::registry::{Registry, RegistryError};

#[derive(Clone, Debug)]
pub struct SparseParams {
    pub h: IntFn,
    /// Attention quota per index.
    pub g: IntFn,
    /// Suspension length; must be increasing.
    pub p: IntFn,
    /// Registry root indices participating in the construction, ascending.
    pub family: Vec<usize>,
    pub max_stage: u64,
    /// Cap on explicit cover size when closed-form tracking does not apply.
    pub explicit_cap: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SparseError {
    FamilyIndexUnfilled { index: usize },
    FamilyNotAscending,
    PNotIncreasing,
    CoverTooLarge { stage: u64 },
    ActingUndefined { index: usize, stage: u64 },
    Registry(RegistryError),
    Family(FamilyError),
    Compressor(CompressorError),
}

impl fmt::Display for SparseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SparseError::FamilyIndexUnfilled { index } => {
                write!(f, "family index {index} does not hold a measure")
            }
            SparseError::FamilyNotAscending => write!(f, "family indices must be ascending"),
            SparseError::PNotIncreasing => write!(f, "suspension function p must be increasing"),
            SparseError::CoverTooLarge { stage } => {
                write!(f, "explicit cover exceeds the cap at stage {stage}")
            }
            SparseError::ActingUndefined { index, stage } => {
                write!(f, "measure {index} undefined while acting at stage {stage}")
            }
            SparseError::Registry(e) => write!(f, "{e}"),
            SparseError::Family(e) => write!(f, "{e}"),
            SparseError::Compressor(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SparseError {}

impl From<RegistryError> for SparseError {
    fn from(e: RegistryError) -> Self {
        SparseError::Registry(e)
    }
}

impl From<FamilyError> for SparseError {
    fn from(e: FamilyError) -> Self {
        SparseError::Family(e)
    }
}

impl From<CompressorError> for SparseError {
    fn from(e: CompressorError) -> Self {
        SparseError::Compressor(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Quiet,
    Suspended,
    Acting { index: usize },
}

/// One line of the construction log; replaying these lines reproduces the
/// run bit for bit.
#[derive(Clone, Debug)]
pub struct StageLog {
    pub stage: u64,
    pub branch: Branch,
    pub kept_bit: Option<bool>,
    pub cover_log2: u64,
    pub cover_mass_is_one: bool,
    /// `(index, member position)` when this stage assigned a test member.
    pub assignment: Option<(usize, u64)>,
}

/// Whether the kept bit at an acting stage is member-independent, so covers
/// and masses admit closed forms.
fn closed_kept_bit(kind: &MeasureKind) -> Option<bool> {
    match kind {
        MeasureKind::Uniform => Some(true),
        MeasureKind::Bernoulli(q) => Some(*q <= Dyadic::one().halve()),
        _ => None,
    }
}

/// Conditional mass of the kept child under a closed-form law.
fn closed_factor(kind: &MeasureKind, kept: bool) -> Dyadic {
    match kind {
        MeasureKind::Uniform => Dyadic::one().halve(),
        MeasureKind::Bernoulli(q) => {
            if kept {
                q.clone()
            } else {
                q.complement()
            }
        }
        _ => unreachable!("closed factors only exist for uniform and Bernoulli laws"),
    }
}

enum CoverState {
    Closed,
    Explicit { members: Vec<BinStr> },
}

struct MemberRecord {
    owner: usize,
    stage: u64,
    mu: Dyadic,
}

/// The running construction. `step` advances one stage; state is otherwise
/// read-only, so a completed run can be replayed or single-stepped in tests.
pub struct Construction<'a> {
    registry: &'a Registry,
    params: SparseParams,
    stage: u64,
    suspended_until: u64,
    attention: BTreeMap<usize, u64>,
    levels: Vec<ActiveLevel>,
    cover: CoverState,
    /// Mathematical `μ_e(C_s)` per family position (`None` once a value is
    /// missing, which only happens for explicit covers over sparse tables).
    mu_cover: Vec<Option<Dyadic>>,
    members: Vec<MemberRecord>,
    log: Vec<StageLog>,
}

impl<'a> Construction<'a> {
    pub fn new(registry: &'a Registry, params: SparseParams) -> Result<Self, SparseError> {
        if params.family.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SparseError::FamilyNotAscending);
        }
        for &i in &params.family {
            if registry.measure(i).is_none() {
                return Err(SparseError::FamilyIndexUnfilled { index: i });
            }
        }
        if !params.p.is_increasing_up_to(params.max_stage + 1) {
            return Err(SparseError::PNotIncreasing);
        }
        let closed = params
            .family
            .iter()
            .all(|&i| closed_kept_bit(&registry.measure(i).unwrap().kind).is_some());
        let cover = if closed {
            CoverState::Closed
        } else {
            CoverState::Explicit { members: vec![BinStr::empty()] }
        };
        let mu_cover = params.family.iter().map(|_| Some(Dyadic::one())).collect();
        let attention = params.family.iter().map(|&i| (i, 0)).collect();
        Ok(Construction {
            registry,
            params,
            stage: 0,
            suspended_until: 0,
            attention,
            levels: Vec::new(),
            cover,
            mu_cover,
            members: Vec::new(),
            log: Vec::new(),
        })
    }

    pub fn current_stage(&self) -> u64 {
        self.stage
    }

    pub fn attention_count(&self, i: usize) -> u64 {
        self.attention.get(&i).copied().unwrap_or(0)
    }

    fn quota(&self, i: usize) -> u64 {
        self.params.g.eval(i as u64)
    }

    /// Whether `μ_i` is defined on `2^{≤n}` within `h(n)` steps.
    fn opportunity(&self, i: usize, n: u64) -> bool {
        match self.registry.measure(i) {
            Some(m) => m.schedule.defined_at(n, self.params.h.eval(n)),
            None => false,
        }
    }

    /// Whether `i` requires attention at `stage`: quota not exhausted, the
    /// measure defined up to the stage within `h`, and no stronger index has
    /// an opportunity inside the suspension window this act would open.
    pub fn requires_attention(&self, i: usize, stage: u64) -> bool {
        if !self.params.family.contains(&i) || (i as u64) >= stage {
            return false;
        }
        if self.attention_count(i) >= self.quota(i) {
            return false;
        }
        if !self.opportunity(i, stage) {
            return false;
        }
        let window_end = self.params.p.eval(stage);
        for &j in &self.params.family {
            if j >= i {
                break;
            }
            if self.attention_count(j) >= self.quota(j) {
                continue;
            }
            for n in (stage + 1)..=window_end {
                if self.opportunity(j, n) {
                    return false;
                }
            }
        }
        true
    }

    fn cover_log2(&self) -> u64 {
        self.stage - self.levels.len() as u64
    }

    /// Advances to stage `s+1`.
    pub fn step(&mut self) -> Result<&StageLog, SparseError> {
        let stage = self.stage + 1;
        let suspended = stage <= self.suspended_until;
        let acting = if suspended {
            None
        } else {
            self.params.family.iter().copied().find(|&i| self.requires_attention(i, stage))
        };

        let mut kept_for_log = None;
        let mut assignment = None;
        match acting {
            None => {
                if let CoverState::Explicit { members } = &mut self.cover {
                    if members.len() as u64 * 2 > self.params.explicit_cap {
                        return Err(SparseError::CoverTooLarge { stage });
                    }
                    let mut next = Vec::with_capacity(members.len() * 2);
                    for m in members.iter() {
                        next.push(m.child(false));
                        next.push(m.child(true));
                    }
                    *members = next;
                }
            }
            Some(i) => {
                let kept = self.act(i, stage)?;
                kept_for_log = kept;
                let count = self.attention.entry(i).or_insert(0);
                *count += 1;
                let member_pos = *count - 1;
                let pos = self.params.family.iter().position(|&e| e == i).unwrap();
                let mu = self.mu_cover[pos]
                    .clone()
                    .ok_or(SparseError::ActingUndefined { index: i, stage })?;
                self.members.push(MemberRecord { owner: i, stage, mu });
                assignment = Some((i, member_pos));
                self.suspended_until = self.suspended_until.max(self.params.p.eval(stage));
            }
        }

        self.stage = stage;
        let branch = match (suspended, acting) {
            (true, _) => Branch::Suspended,
            (false, None) => Branch::Quiet,
            (false, Some(i)) => Branch::Acting { index: i },
        };
        self.log.push(StageLog {
            stage,
            branch,
            kept_bit: kept_for_log,
            cover_log2: self.cover_log2(),
            cover_mass_is_one: true,
            assignment,
        });
        Ok(self.log.last().unwrap())
    }

    /// The acting branch: prune the cover to the lighter `μ_i`-child under
    /// each member and move the constructed measure's mass with it.
    fn act(&mut self, i: usize, stage: u64) -> Result<Option<bool>, SparseError> {
        let acting_kind = &self.registry.measure(i).unwrap().kind;
        match &mut self.cover {
            CoverState::Closed => {
                let kept = closed_kept_bit(acting_kind).expect("closed cover requires closed kinds");
                for (pos, &e) in self.params.family.iter().enumerate() {
                    let kind = &self.registry.measure(e).unwrap().kind;
                    let factor = closed_factor(kind, kept);
                    if let Some(mu) = &self.mu_cover[pos] {
                        self.mu_cover[pos] = Some(mu.mul(&factor));
                    }
                }
                self.levels.push(ActiveLevel {
                    stage,
                    acting_index: i,
                    kept: KeptRule::Bit(kept),
                });
                Ok(Some(kept))
            }
            CoverState::Explicit { members } => {
                let budget = self.params.h.eval(stage);
                let mut kept_map = BTreeMap::new();
                let mut next = Vec::with_capacity(members.len());
                for m in members.iter() {
                    let v0 = self
                        .registry
                        .eval(i, &m.child(false), budget)?
                        .ok_or(SparseError::ActingUndefined { index: i, stage })?;
                    let v1 = self
                        .registry
                        .eval(i, &m.child(true), budget)?
                        .ok_or(SparseError::ActingUndefined { index: i, stage })?;
                    // Least j with μ(σj) ≥ μ(σ(1-j)) is dropped; its
                    // complement is kept, so ties keep the 1-child.
                    let kept = v0 >= v1;
                    kept_map.insert(m.clone(), kept);
                    next.push(m.child(kept));
                }
                *members = next;
                for (pos, &e) in self.params.family.iter().enumerate() {
                    let kind = self.registry.measure(e).unwrap().kind.clone();
                    let mut acc = Some(Dyadic::zero());
                    for m in members.iter() {
                        match (acc.take(), kind.raw_value(m)) {
                            (Some(a), Some(v)) => acc = Some(a.add(&v)),
                            _ => acc = None,
                        }
                        if acc.is_none() {
                            break;
                        }
                    }
                    self.mu_cover[pos] = acc;
                }
                self.levels.push(ActiveLevel {
                    stage,
                    acting_index: i,
                    kept: KeptRule::Table(kept_map),
                });
                Ok(None)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SparseResult {
    pub lambda_index: usize,
    pub law: Arc<ConstructedLaw>,
    pub family: TestFamily,
    /// `(stage, acting index)` per active stage, ascending.
    pub active_stages: Vec<(u64, usize)>,
    pub attention: BTreeMap<usize, u64>,
    pub quotas: BTreeMap<usize, u64>,
    /// Quota reached within the horizon.
    pub certified: BTreeMap<usize, bool>,
    /// Quota unreached although opportunities continue past the horizon.
    pub horizon_incomplete: Vec<usize>,
    pub log: Vec<StageLog>,
    pub max_stage: u64,
}

impl SparseResult {
    pub fn active_stage_list(&self) -> Vec<u64> {
        self.active_stages.iter().map(|&(s, _)| s).collect()
    }

    /// `p(n_i) < n_{i+1}` for consecutive active stages.
    pub fn active_stages_sparse(&self, p: &IntFn) -> bool {
        self.active_stage_list().windows(2).all(|w| p.eval(w[0]) < w[1])
    }
}

/// Runs the construction to `max_stage`, registers the resulting measure in
/// a reserved registry slot, and packages covers, tests, and logs.
pub fn build_sparse(registry: &mut Registry, params: SparseParams) -> Result<SparseResult, SparseError> {
    let max_stage = params.max_stage;
    let family_indices = params.family.clone();
    let h = params.h.clone();
    let g = params.g.clone();

    let mut construction = Construction::new(registry, params)?;
    for _ in 0..max_stage {
        construction.step()?;
    }
    let Construction { levels, attention, members, log, .. } = construction;

    let law = Arc::new(ConstructedLaw::new(levels, max_stage));
    let lambda = StagedMeasure {
        kind: MeasureKind::Constructed(law.clone()),
        schedule: Schedule { stage_fn: IntFn::Linear { a: 1, b: 0 }, total_upto: Some(max_stage) },
    };
    let lambda_index = registry.reserve()?;
    registry.fill(lambda_index, lambda)?;

    let mut tests: Vec<ClopenTest> = family_indices.iter().map(|&i| ClopenTest::new(i)).collect();
    let mut active_stages = Vec::new();
    for rec in &members {
        active_stages.push((rec.stage, rec.owner));
        let pos = family_indices.iter().position(|&e| e == rec.owner).unwrap();
        tests[pos].members.push(TestMember {
            set: MemberSet::Cover { law: law.clone(), stage: rec.stage },
            assigned_stage: rec.stage,
            mu_at_assignment: rec.mu.clone(),
        });
    }

    let mut quotas = BTreeMap::new();
    let mut certified = BTreeMap::new();
    let mut horizon_incomplete = Vec::new();
    for &i in &family_indices {
        let quota = g.eval(i as u64);
        let reached = attention.get(&i).copied().unwrap_or(0) >= quota;
        quotas.insert(i, quota);
        certified.insert(i, reached);
        if !reached {
            // Opportunities continuing past the horizon mean the quota was
            // only missed for lack of stages.
            let probe_end = max_stage.saturating_mul(4).saturating_add(16);
            let open = ((max_stage + 1)..=probe_end).any(|n| {
                registry
                    .measure(i)
                    .map(|m| m.schedule.defined_at(n, h.eval(n)))
                    .unwrap_or(false)
            });
            if open {
                horizon_incomplete.push(i);
            }
        }
    }

    Ok(SparseResult {
        lambda_index,
        law,
        family: TestFamily { tests },
        active_stages,
        attention,
        quotas,
        certified,
        horizon_incomplete,
        log,
        max_stage,
    })
}

/// Result of composing the construction with the compressor through a
/// reserved family index.
#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub family_index: usize,
    pub coding_constant: u64,
    /// Effective quota `g1(e) = q(t, e, g0(e))` per family index.
    pub g1: Vec<(usize, u64)>,
    pub sparse: SparseResult,
    pub outcomes: Vec<CompressorOutcome>,
    pub weight_added: Dyadic,
}

/// Reserves a family index `t`, builds the construction with the inflated
/// quota `g1(e) = q(t, e, g0(e))`, fills the reservation with the emitted
/// family, and invokes the compressor for each family member at `k = g0(e)`
/// (the literal target, one past the last member, which never fires) and at
/// `k = g0(e) - 1`, which fires on the final member once the quota is
/// reached and forces deficiency at least `g0(e) - 1` there.
pub fn fixed_point_compose(
    registry: &mut Registry,
    universal: &mut UniversalMachine,
    machine_idx: usize,
    families: &mut FamilySpace,
    h0: IntFn,
    g0: &IntFn,
    p0: IntFn,
    family: Vec<usize>,
    max_stage: u64,
    explicit_cap: u64,
) -> Result<FixedPointResult, SparseError> {
    let t = families.reserve();
    let x = universal.machine(machine_idx).constant;

    let max_index = family.iter().copied().max().unwrap_or(0);
    let mut g1_values = Vec::new();
    for i in 0..=max_index as u64 {
        g1_values.push(crate::clopen::q(t, i as usize, g0.eval(i), x));
    }
    let g1 = IntFn::Table {
        values: g1_values.clone(),
        beyond: alloc::boxed::Box::new(IntFn::Const(*g1_values.last().unwrap_or(&0))),
    };

    let sparse = build_sparse(
        registry,
        SparseParams { h: h0, g: g1, p: p0, family: family.clone(), max_stage, explicit_cap },
    )?;
    families.fill(t, sparse.family.clone())?;

    let mut outcomes = Vec::new();
    let mut weight_added = Dyadic::zero();
    let fam = families.get(t).expect("family filled above");
    for &e in &family {
        let quota0 = g0.eval(e as u64);
        let mut ks = vec![quota0];
        if quota0 > 0 {
            ks.push(quota0 - 1);
        }
        ks.sort_unstable();
        for k in ks {
            let outcome =
                compressor_run(registry, universal, machine_idx, fam, t, e, k, explicit_cap)?;
            weight_added = weight_added.add(&outcome.weight_added);
            outcomes.push(outcome);
        }
    }

    Ok(FixedPointResult {
        family_index: t,
        coding_constant: x,
        g1: family.iter().map(|&e| (e, crate::clopen::q(t, e, g0.eval(e as u64), x))).collect(),
        sparse,
        outcomes,
        weight_added,
    })
}

/// One stream/index line of the fixed-point dichotomy check: a stream
/// through the covers either shows deficiency at least `g0(e) - 1` for a
/// family measure, or that measure's time-complexity exceeds `h0` on the
/// checked range.
#[derive(Clone, Debug)]
pub struct DichotomyRow {
    pub index: usize,
    pub stream_deficiency: DeficiencyValue,
    pub threshold: i64,
    pub below_threshold: bool,
    pub dominates: bool,
    pub consistent: bool,
}

pub fn fixed_point_dichotomy(
    registry: &Registry,
    universal: &UniversalMachine,
    result: &FixedPointResult,
    g0: &IntFn,
    h0: &IntFn,
    stream: &BinStr,
    check_range: impl Iterator<Item = u64> + Clone,
) -> Vec<DichotomyRow> {
    let mut rows = Vec::new();
    for &(e, _) in &result.g1 {
        let d = stream_deficiency(registry, universal, e, stream, stream.len());
        let threshold = g0.eval(e as u64) as i64 - 1;
        let below = match d {
            DeficiencyValue::Finite(v) => v < threshold,
            DeficiencyValue::Undefined => true,
            DeficiencyValue::Infinite => false,
        };
        let dominates = registry.time_complexity_dominates(e, h0, check_range.clone());
        rows.push(DichotomyRow {
            index: e,
            stream_deficiency: d,
            threshold,
            below_threshold: below,
            dominates,
            consistent: !below || dominates,
        });
    }
    rows
}

/// Renders a stage log line in the stable text form used by the harness.
pub fn log_line(entry: &StageLog) -> alloc::string::String {
    let branch = match entry.branch {
        Branch::Quiet => format!("\"quiet\""),
        Branch::Suspended => format!("\"suspended\""),
        Branch::Acting { index } => format!("\"acting\",\"index\":{index}"),
    };
    let kept = match entry.kept_bit {
        Some(b) => format!(",\"kept\":{}", if b { 1 } else { 0 }),
        None => alloc::string::String::new(),
    };
    let assignment = match entry.assignment {
        Some((i, j)) => format!(",\"assign\":[{i},{j}]"),
        None => alloc::string::String::new(),
    };
    format!(
        "{{\"s\":{},\"branch\":{}{}{},\"cover_log2\":{},\"mass_one\":{}}}",
        entry.stage, branch, kept, assignment, entry.cover_log2, entry.cover_mass_is_one
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::bs;
    use crate::machine::PrefixFreeMachine;
    use alloc::string::ToString;
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    fn instant_uniform() -> StagedMeasure {
        StagedMeasure::uniform(Schedule::instant())
    }

    #[test]
    fn quiet_stage_doubles_cover() {
        // Quota zero: nothing ever acts.
        let registry = Registry::new(vec![instant_uniform()], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(0),
            p: IntFn::Linear { a: 1, b: 2 },
            family: vec![0],
            max_stage: 8,
            explicit_cap: 1 << 16,
        };
        let mut c = Construction::new(&registry, params).unwrap();
        let first = c.step().unwrap();
        assert_eq!(first.branch, Branch::Quiet);
        assert_eq!(first.cover_log2, 1);
    }

    #[test]
    fn single_uniform_hand_trace() {
        // h(n)=n, g≡2, p(n)=n+2, one instant uniform measure: acts at
        // stages 1 and 4, both test members halve in mass.
        let mut registry = Registry::new(vec![instant_uniform()], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(2),
            p: IntFn::Linear { a: 1, b: 2 },
            family: vec![0],
            max_stage: 40,
            explicit_cap: 1 << 16,
        };
        let result = build_sparse(&mut registry, params).unwrap();
        assert_eq!(result.active_stage_list(), vec![1, 4]);
        let test = result.family.test_for(0).unwrap();
        assert_eq!(test.len(), 2);
        assert_eq!(test.member(0).unwrap().mu_at_assignment, dy(1, 1));
        assert_eq!(test.member(1).unwrap().mu_at_assignment, dy(1, 2));
        assert_eq!(result.certified.get(&0), Some(&true));

        // Uniform acting keeps the 1-children.
        let law = &result.law;
        assert_eq!(law.value(&bs("1")), Some(Dyadic::one()));
        assert_eq!(law.value(&bs("0")), Some(Dyadic::zero()));
        // Stage 2 and 3 are suspended, stage 4 acts again.
        assert_eq!(law.value(&bs("10")), Some(dy(1, 1)));
        assert_eq!(law.value(&bs("1011")), Some(dy(1, 2)));
        assert_eq!(law.value(&bs("1010")), Some(Dyadic::zero()));

        // The cover keeps full mass at every stage.
        for s in 0..=40 {
            assert!(law.cover_mass(s).is_one());
        }
        // The registered measure validates and is p-sparse.
        let lambda = registry.measure(result.lambda_index).unwrap();
        assert!(crate::measure::validate_measure(lambda, 8, 40).is_valid());
        let witness =
            crate::measure::is_p_sparse(lambda, &IntFn::Linear { a: 1, b: 2 }, 10).unwrap();
        assert!(witness.sparse);
        assert_eq!(witness.witness, vec![1, 4]);
    }

    #[test]
    fn partial_member_acts_finitely_and_dominates() {
        let partial = StagedMeasure {
            kind: MeasureKind::Uniform,
            schedule: Schedule { stage_fn: IntFn::Const(0), total_upto: Some(3) },
        };
        let mut registry = Registry::new(vec![partial], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(10),
            p: IntFn::Linear { a: 1, b: 1 },
            family: vec![0],
            max_stage: 30,
            explicit_cap: 1 << 16,
        };
        let result = build_sparse(&mut registry, params).unwrap();
        // Defined lengths stop at 3, so it can act at stages 1, 2, 3 only.
        assert!(result.attention.get(&0).copied().unwrap() <= 3);
        assert!(registry.time_complexity_dominates(0, &IntFn::Linear { a: 1, b: 0 }, 4..30));
        assert!(!result.horizon_incomplete.contains(&0));
    }

    #[test]
    fn priority_blocks_weaker_indices() {
        // Index 0 is slow (opportunities only at early stages), index 1
        // fast. At stage 1 index 0 acts; once index 0 has no opportunities
        // inside future windows, index 1 takes over.
        let slow = StagedMeasure::uniform(Schedule {
            stage_fn: IntFn::Exp { base: 2, scale: 1, offset: 0 },
            total_upto: None,
        });
        let fast = StagedMeasure::uniform(Schedule::linear());
        let mut registry = Registry::new(vec![slow, fast], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 3 },
            g: IntFn::Const(2),
            p: IntFn::Linear { a: 2, b: 2 },
            family: vec![0, 1],
            max_stage: 60,
            explicit_cap: 1 << 16,
        };
        let c = Construction::new(&registry, params.clone()).unwrap();
        // Stage 1: 2^1 = 2 ≤ h(1) = 4, so the slow index requires attention.
        assert!(c.requires_attention(0, 1));
        // Index 1 is blocked at stage 1 by index 0's window opportunity...
        assert!(!c.requires_attention(1, 1));
        drop(c);
        let result = build_sparse(&mut registry, params).unwrap();
        assert_eq!(result.active_stages[0], (1, 0));
        // ...and eventually the fast index receives attention.
        assert!(result.attention.get(&1).copied().unwrap() >= 1);
        assert!(result.active_stages_sparse(&IntFn::Linear { a: 2, b: 2 }));
    }

    #[test]
    fn quota_exhaustion_stops_attention() {
        let registry = Registry::new(vec![instant_uniform()], 0);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(0),
            p: IntFn::Linear { a: 1, b: 2 },
            family: vec![0],
            max_stage: 10,
            explicit_cap: 16,
        };
        let c = Construction::new(&registry, params).unwrap();
        assert!(!c.requires_attention(0, 1));
    }

    #[test]
    fn bernoulli_acting_keeps_lighter_child() {
        // bernoulli(3/4): the 1-child is heavier, so acting keeps the
        // 0-child and the kept mass is 1/4 of the parent.
        let mut registry =
            Registry::new(vec![StagedMeasure::bernoulli(dy(3, 2), Schedule::instant())], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(2),
            p: IntFn::Linear { a: 1, b: 2 },
            family: vec![0],
            max_stage: 30,
            explicit_cap: 1 << 16,
        };
        let result = build_sparse(&mut registry, params).unwrap();
        let test = result.family.test_for(0).unwrap();
        assert_eq!(test.member(0).unwrap().mu_at_assignment, dy(1, 2));
        // Halving between consecutive members holds with room to spare.
        let m0 = &test.member(0).unwrap().mu_at_assignment;
        let m1 = &test.member(1).unwrap().mu_at_assignment;
        assert!(*m1 <= m0.halve());
        // Acting keeps the 0-children.
        assert_eq!(result.law.value(&bs("0")), Some(Dyadic::one()));
        assert_eq!(result.law.value(&bs("1")), Some(Dyadic::zero()));
    }

    #[test]
    fn explicit_mode_matches_closed_mode() {
        // A mixture forces explicit covers; mixing weight 1 on a uniform
        // component behaves exactly like the closed uniform run.
        let mixture = StagedMeasure {
            kind: MeasureKind::Mixture(vec![(Dyadic::one(), MeasureKind::Uniform)]),
            schedule: Schedule::instant(),
        };
        let mut reg_a = Registry::new(vec![mixture], 1);
        let mut reg_b = Registry::new(vec![instant_uniform()], 1);
        let params = SparseParams {
            h: IntFn::Linear { a: 1, b: 0 },
            g: IntFn::Const(2),
            p: IntFn::Linear { a: 1, b: 2 },
            family: vec![0],
            max_stage: 12,
            explicit_cap: 1 << 12,
        };
        let a = build_sparse(&mut reg_a, params.clone()).unwrap();
        let b = build_sparse(&mut reg_b, params).unwrap();
        assert_eq!(a.active_stage_list(), b.active_stage_list());
        for sigma in crate::binstr::all_up_to(10) {
            assert_eq!(a.law.value(&sigma), b.law.value(&sigma));
        }
    }

    #[test]
    fn fixed_point_reserves_and_fires() {
        let mut registry = Registry::new(
            vec![instant_uniform(), StagedMeasure::bernoulli(dy(1, 2), Schedule::linear())],
            1,
        );
        let mut universal = UniversalMachine::new(vec![
            PrefixFreeMachine::new("compressor".to_string(), 3),
        ])
        .unwrap();
        let mut families = FamilySpace::new();
        let g0 = IntFn::Const(2);
        let result = fixed_point_compose(
            &mut registry,
            &mut universal,
            0,
            &mut families,
            IntFn::Linear { a: 1, b: 0 },
            &g0,
            IntFn::Linear { a: 1, b: 0 },
            vec![0, 1],
            160,
            1 << 18,
        )
        .unwrap();
        // Reservation soundness: the reserved index got filled.
        assert_eq!(result.family_index, 0);
        assert!(families.get(0).is_some());
        // g1(e) = t + e + g0(e) + x + 5.
        assert_eq!(result.g1, vec![(0, 10), (1, 11)]);
        // The k = g0(e) invocation targets one past the final member and
        // never fires; k = g0(e)-1 fires once the quota is reached.
        for &e in &[0usize, 1usize] {
            let fired: Vec<_> =
                result.outcomes.iter().filter(|o| o.e == e && o.fired).collect();
            let quota_reached = result.sparse.certified.get(&e).copied().unwrap_or(false);
            assert_eq!(!fired.is_empty(), quota_reached);
            for o in &fired {
                assert_eq!(o.k, 1);
                // Every compressed string now has deficiency ≥ k.
                for (sigma, _) in &o.requests {
                    let d = crate::deficiency::deficiency(
                        &registry,
                        &universal,
                        e,
                        sigma,
                        u64::MAX,
                    );
                    match d {
                        DeficiencyValue::Finite(v) => assert!(v >= o.k as i64),
                        DeficiencyValue::Infinite => {}
                        DeficiencyValue::Undefined => panic!("deficiency undefined after firing"),
                    }
                }
            }
        }
        // Weight stays within the series bound.
        assert!(result.weight_added <= dy(1, 3));
    }
}
