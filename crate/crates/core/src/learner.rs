//! Learners over the measure registry: cost-minimizing prediction with a
//! limit-totality oracle, the uniform-family learner, the expansionary-stage
//! partial learner, and the wrapper that turns predictions into deficiency
//! bounds. Traces record every prediction along a stream and are classified
//! with finite-window surrogates for limit behavior.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::binstr::BinStr;
use crate::deficiency::{cost, deficiency, stream_deficiency, Cost, DeficiencyValue};
use crate::machine::UniversalMachine;
use crate::registry::Registry;

/// Shared read-only state a learner consults at each step.
#[derive(Clone, Copy)]
pub struct LearnCtx<'a> {
    pub registry: &'a Registry,
    pub universal: &'a UniversalMachine,
}

/// Scripted limit-totality approximator: `f(e, s)` converges to whether
/// `μ_e` is total, with a scripted value before the convergence stage.
#[derive(Clone, Debug)]
pub struct OracleScript {
    pub converge_stage: u64,
    pub pre_value: bool,
}

impl Default for OracleScript {
    fn default() -> Self {
        OracleScript { converge_stage: 0, pre_value: false }
    }
}

#[derive(Clone, Debug, Default)]
pub struct HighOracle {
    pub default: OracleScript,
    pub scripts: BTreeMap<usize, OracleScript>,
}

impl HighOracle {
    /// Correct from stage zero on every index.
    pub fn truthful() -> Self {
        HighOracle::default()
    }

    pub fn value(&self, registry: &Registry, e: usize, stage: u64) -> bool {
        let root = registry.resolve(e);
        let script = self.scripts.get(&root).unwrap_or(&self.default);
        if stage >= script.converge_stage {
            registry.is_total(root)
        } else {
            script.pre_value
        }
    }
}

/// A prediction; `fallback` marks the stand-in emitted when the oracle
/// approves no candidate at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub index: usize,
    pub fallback: bool,
}

/// `𝓛(σ)`: least oracle-approved index `i ≤ |σ|` minimizing
/// `cost(σ, i)[|σ|]`, ties to the least index. With no approved candidate
/// the learner falls back to index 0, flagged in the trace.
///
/// Only root indices are scanned: a padding of root `r` is approved exactly
/// when `r` is, carries the same deficiencies, and has a strictly larger
/// index term, so it can never beat `r`.
pub fn oracle_ex_learner(ctx: LearnCtx<'_>, oracle: &HighOracle, sigma: &BinStr) -> Prediction {
    let stage = sigma.len();
    let max_i = (ctx.registry.root_count().saturating_sub(1) as u64).min(stage) as usize;
    let mut best: Option<(Cost, usize)> = None;
    for i in 0..=max_i {
        if !oracle.value(ctx.registry, i, stage) {
            continue;
        }
        let c = cost(ctx.registry, ctx.universal, sigma, i, stage);
        let better = match &best {
            None => true,
            Some((bc, _)) => c < *bc,
        };
        if better {
            best = Some((c, i));
        }
    }
    match best {
        Some((_, i)) => Prediction { index: i, fallback: false },
        None => Prediction { index: 0, fallback: true },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmptyFamily;

impl core::fmt::Display for EmptyFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "uniform-family learner requires a non-empty family")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EmptyFamily {}

/// Predicts among a fixed list of total measures: the least family position
/// minimizing `position + max prefix deficiency`, mapped back to the
/// member's registry index.
pub fn uniform_family_learner(
    ctx: LearnCtx<'_>,
    family: &[usize],
    sigma: &BinStr,
) -> Result<usize, EmptyFamily> {
    if family.is_empty() {
        return Err(EmptyFamily);
    }
    let stage = sigma.len();
    let mut best: Option<(Cost, usize)> = None;
    for (pos, &member) in family.iter().enumerate() {
        let c = family_cost(ctx, sigma, member, pos as u64, stage);
        let better = match &best {
            None => true,
            Some((bc, _)) => c < *bc,
        };
        if better {
            best = Some((c, pos));
        }
    }
    Ok(family[best.expect("family is non-empty").1])
}

/// `position + max{d_member(σ↾n)[s]}` with the empty max defaulting to 0.
fn family_cost(ctx: LearnCtx<'_>, sigma: &BinStr, member: usize, position: u64, stage: u64) -> Cost {
    let mut max_d: Option<i64> = None;
    for n in 0..=sigma.len() {
        match deficiency(ctx.registry, ctx.universal, member, &sigma.prefix(n), stage) {
            DeficiencyValue::Infinite => return Cost::Infinite,
            DeficiencyValue::Finite(v) => max_d = Some(max_d.map_or(v, |m| m.max(v))),
            DeficiencyValue::Undefined => {}
        }
    }
    Cost::Finite((position as i64 + max_d.unwrap_or(0)).max(0) as u64)
}

/// Largest `ℓ ≤ s` with `μ_i(2^{≤ℓ})[s]` defined, or `None` when even the
/// root is undefined at `s`. The cap at `s` reflects that a measure program
/// cannot settle lengths beyond its own runtime.
pub fn defined_length(registry: &Registry, i: usize, stage: u64) -> Option<u64> {
    let m = registry.measure(i)?;
    if !m.schedule.defined_at(0, stage) {
        return None;
    }
    let mut l = 0;
    while l + 1 <= stage && m.schedule.defined_at(l + 1, stage) {
        l += 1;
    }
    Some(l)
}

/// A stage is `i`-expansionary when the defined length strictly exceeds its
/// value at every earlier `i`-expansionary stage; since defined lengths are
/// non-decreasing, these are exactly the record stages.
pub fn is_expansionary(registry: &Registry, i: usize, stage: u64) -> bool {
    let now = defined_length(registry, i, stage);
    if now.is_none() {
        return false;
    }
    if stage == 0 {
        return true;
    }
    now > defined_length(registry, i, stage - 1)
}

/// Which prefix enters the disqualification condition of the partial
/// learner: the literal length-`k` prefix, or the full current string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrefixMode {
    IndexPrefix,
    FullString,
}

/// The partial learner. At stage `s = |σ|` it finds the least `i ≤ s` such
/// that `s` is `i`-expansionary and `d_i(σ)[s] ≤ i`, then outputs the least
/// padding of `i` exceeding every `k`-expansionary stage `t < s` (for
/// `k < i`) at which `k` still looked viable; `None` when no `i` qualifies.
pub fn partial_learner(ctx: LearnCtx<'_>, sigma: &BinStr, mode: PrefixMode) -> Option<usize> {
    let s = sigma.len();
    let chosen = (0..=s as usize).find(|&i| {
        is_expansionary(ctx.registry, i, s)
            && deficiency(ctx.registry, ctx.universal, i, sigma, s).at_most(i as i64)
    })?;
    let mut bound: u64 = 0;
    for k in 0..chosen {
        for t in 0..s {
            if !is_expansionary(ctx.registry, k, t) {
                continue;
            }
            let prefix = match mode {
                PrefixMode::IndexPrefix => sigma.prefix((k as u64).min(s)),
                PrefixMode::FullString => sigma.clone(),
            };
            if deficiency(ctx.registry, ctx.universal, k, &prefix, t).at_most(k as i64) {
                bound = bound.max(t);
            }
        }
    }
    Some(ctx.registry.pad_above(chosen, bound as usize))
}

/// Cap standing in for an infinite deficiency estimate in the wrapper.
pub const WRAPPER_INFINITY_CAP: u64 = 4096;

/// Strong wrapper: re-index the inner prediction so the returned index
/// denotes the same measure and numerically exceeds the current deficiency
/// estimate `d(F(σ), σ)[|σ|]`.
pub fn strong_wrapper(ctx: LearnCtx<'_>, inner_prediction: usize, sigma: &BinStr) -> usize {
    let d = deficiency(ctx.registry, ctx.universal, inner_prediction, sigma, sigma.len());
    let t = d.saturate(WRAPPER_INFINITY_CAP);
    ctx.registry.pad_above(inner_prediction, t as usize)
}

/// Learner variants runnable over a trace.
#[derive(Clone, Debug)]
pub enum LearnerSpec {
    OracleEx,
    UniformFamily(Vec<usize>),
    Partial(PrefixMode),
    Wrapped(Box<LearnerSpec>),
    Constant(usize),
}

#[derive(Clone, Debug)]
pub struct Learner {
    pub spec: LearnerSpec,
    pub oracle: HighOracle,
}

impl Learner {
    pub fn new(spec: LearnerSpec, oracle: HighOracle) -> Self {
        Learner { spec, oracle }
    }

    /// One prediction; `None` is the partial learner's no-output.
    pub fn predict(&self, ctx: LearnCtx<'_>, sigma: &BinStr) -> Option<Prediction> {
        self.predict_spec(ctx, &self.spec, sigma)
    }

    /// Table-backed prediction on the stream prefix of length `n`; agrees
    /// exactly with [`Learner::predict`] on that prefix.
    pub fn predict_at(&self, table: &StreamTable<'_>, n: u64) -> Option<Prediction> {
        self.predict_at_spec(table, &self.spec, n)
    }

    fn predict_at_spec(
        &self,
        table: &StreamTable<'_>,
        spec: &LearnerSpec,
        n: u64,
    ) -> Option<Prediction> {
        let registry = table.ctx.registry;
        match spec {
            LearnerSpec::OracleEx => {
                let max_i = (registry.root_count().saturating_sub(1) as u64).min(n) as usize;
                let mut best: Option<(Cost, usize)> = None;
                for i in 0..=max_i {
                    if !self.oracle.value(registry, i, n) {
                        continue;
                    }
                    let c = table.cost_at(i, n, n);
                    let better = match &best {
                        None => true,
                        Some((bc, _)) => c < *bc,
                    };
                    if better {
                        best = Some((c, i));
                    }
                }
                Some(match best {
                    Some((_, i)) => Prediction { index: i, fallback: false },
                    None => Prediction { index: 0, fallback: true },
                })
            }
            LearnerSpec::UniformFamily(family) => {
                if family.is_empty() {
                    return None;
                }
                let mut best: Option<(Cost, usize)> = None;
                for (pos, &member) in family.iter().enumerate() {
                    let c = table.cost_with_term(pos as u64, member, n, n);
                    let better = match &best {
                        None => true,
                        Some((bc, _)) => c < *bc,
                    };
                    if better {
                        best = Some((c, pos));
                    }
                }
                Some(Prediction { index: family[best.unwrap().1], fallback: false })
            }
            LearnerSpec::Partial(mode) => {
                let chosen = (0..=n as usize).find(|&i| {
                    table.is_expansionary(i, n) && table.deficiency_at(i, n, n).at_most(i as i64)
                })?;
                let mut bound: u64 = 0;
                for k in 0..chosen {
                    for t in 0..n {
                        if !table.is_expansionary(k, t) {
                            continue;
                        }
                        let m = match mode {
                            PrefixMode::IndexPrefix => (k as u64).min(n),
                            PrefixMode::FullString => n,
                        };
                        if table.deficiency_at(k, m, t).at_most(k as i64) {
                            bound = bound.max(t);
                        }
                    }
                }
                Some(Prediction {
                    index: registry.pad_above(chosen, bound as usize),
                    fallback: false,
                })
            }
            LearnerSpec::Wrapped(inner) => {
                let p = self.predict_at_spec(table, inner, n)?;
                let t = table.deficiency_at(p.index, n, n).saturate(WRAPPER_INFINITY_CAP);
                Some(Prediction {
                    index: registry.pad_above(p.index, t as usize),
                    fallback: p.fallback,
                })
            }
            LearnerSpec::Constant(index) => Some(Prediction { index: *index, fallback: false }),
        }
    }

    fn predict_spec(
        &self,
        ctx: LearnCtx<'_>,
        spec: &LearnerSpec,
        sigma: &BinStr,
    ) -> Option<Prediction> {
        match spec {
            LearnerSpec::OracleEx => Some(oracle_ex_learner(ctx, &self.oracle, sigma)),
            LearnerSpec::UniformFamily(family) => uniform_family_learner(ctx, family, sigma)
                .ok()
                .map(|index| Prediction { index, fallback: false }),
            LearnerSpec::Partial(mode) => {
                partial_learner(ctx, sigma, *mode).map(|index| Prediction { index, fallback: false })
            }
            LearnerSpec::Wrapped(inner) => {
                let p = self.predict_spec(ctx, inner, sigma)?;
                Some(Prediction {
                    index: strong_wrapper(ctx, p.index, sigma),
                    fallback: p.fallback,
                })
            }
            LearnerSpec::Constant(index) => Some(Prediction { index: *index, fallback: false }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum IdealCell {
    Val(i64),
    Zero,
    Missing,
}

/// Per-stream evaluation table: the ideal codelength of every prefix under
/// every root, merged compression-request entries per prefix, and defined
/// lengths per stage. Trace steps then cost integer lookups instead of
/// repeated bignum evaluation. The machine set must stay static while the
/// table is alive (asserted).
pub struct StreamTable<'a> {
    ctx: LearnCtx<'a>,
    /// `[root][m]`: `⌈-log2 μ_root(X↾m)⌉`.
    ideals: Vec<Vec<IdealCell>>,
    /// `[m]`: accepted `(stage, K)` pairs sorted by stage with a running
    /// minimum folded in.
    k_min: Vec<Vec<(u64, u64)>>,
    /// `[root][s]`: capped defined length `ℓ_root(s)`.
    lengths: Vec<Vec<Option<u64>>>,
    horizon: u64,
    log_len: usize,
}

impl<'a> StreamTable<'a> {
    pub fn new(ctx: LearnCtx<'a>, stream: &BinStr) -> Self {
        let n = stream.len();
        let roots = ctx.registry.root_count();
        let mut ideals = Vec::with_capacity(roots);
        for root in 0..roots {
            let mut col = Vec::with_capacity(n as usize + 1);
            for m in 0..=n {
                let cell = match ctx.registry.measure(root) {
                    None => IdealCell::Missing,
                    Some(measure) => match measure.kind.raw_value(&stream.prefix(m)) {
                        None => IdealCell::Missing,
                        Some(v) if v.is_zero() => IdealCell::Zero,
                        Some(v) => IdealCell::Val(v.ceil_neg_log2().unwrap()),
                    },
                };
                col.push(cell);
            }
            ideals.push(col);
        }
        let mut k_min = Vec::with_capacity(n as usize + 1);
        for m in 0..=n {
            let entries = ctx.universal.k_entries(&stream.prefix(m));
            let mut folded = Vec::with_capacity(entries.len());
            let mut best = u64::MAX;
            for (stage, k) in entries {
                best = best.min(k);
                folded.push((stage, best));
            }
            k_min.push(folded);
        }
        let mut lengths = Vec::with_capacity(roots);
        for root in 0..roots {
            let mut col = Vec::with_capacity(n as usize + 1);
            let schedule = ctx.registry.measure(root).map(|m| m.schedule.clone());
            let mut cur: Option<u64> = None;
            for s in 0..=n {
                if let Some(schedule) = &schedule {
                    if cur.is_none() && schedule.defined_at(0, s) {
                        cur = Some(0);
                    }
                    while let Some(l) = cur {
                        if l + 1 <= s && schedule.defined_at(l + 1, s) {
                            cur = Some(l + 1);
                        } else {
                            break;
                        }
                    }
                }
                col.push(cur);
            }
            lengths.push(col);
        }
        StreamTable { ctx, ideals, k_min, lengths, horizon: n, log_len: ctx.universal.log_len() }
    }

    fn assert_static(&self) {
        debug_assert_eq!(
            self.log_len,
            self.ctx.universal.log_len(),
            "machine set mutated while a stream table was alive"
        );
    }

    /// `K(X↾m)[s]` from the folded entry list.
    fn k_of(&self, m: u64, stage: u64) -> Option<u64> {
        let entries = &self.k_min[m as usize];
        let idx = entries.partition_point(|(s, _)| *s <= stage);
        if idx == 0 {
            None
        } else {
            Some(entries[idx - 1].1)
        }
    }

    /// `d_index(X↾m)[s]`, agreeing with [`deficiency`].
    pub fn deficiency_at(&self, index: usize, m: u64, stage: u64) -> DeficiencyValue {
        self.assert_static();
        let root = self.ctx.registry.resolve(index);
        let defined = self
            .ctx
            .registry
            .measure(root)
            .map(|meas| meas.schedule.defined_at(m, stage))
            .unwrap_or(false);
        if !defined {
            return DeficiencyValue::Undefined;
        }
        match self.ideals[root][m as usize] {
            IdealCell::Missing => DeficiencyValue::Undefined,
            IdealCell::Zero => DeficiencyValue::Infinite,
            IdealCell::Val(ideal) => match self.k_of(m, stage) {
                None => DeficiencyValue::Undefined,
                Some(k) => DeficiencyValue::Finite(ideal - k as i64),
            },
        }
    }

    /// `term + max{d_index(X↾m)[s] : m ≤ n}`, clamped at zero, agreeing
    /// with [`cost`].
    pub fn cost_with_term(&self, term: u64, index: usize, n: u64, stage: u64) -> Cost {
        let mut max_d: Option<i64> = None;
        for m in 0..=n {
            match self.deficiency_at(index, m, stage) {
                DeficiencyValue::Infinite => return Cost::Infinite,
                DeficiencyValue::Finite(v) => max_d = Some(max_d.map_or(v, |b| b.max(v))),
                DeficiencyValue::Undefined => {}
            }
        }
        Cost::Finite((term as i64 + max_d.unwrap_or(0)).max(0) as u64)
    }

    pub fn cost_at(&self, index: usize, n: u64, stage: u64) -> Cost {
        self.cost_with_term(index as u64, index, n, stage)
    }

    pub fn is_expansionary(&self, index: usize, stage: u64) -> bool {
        if stage > self.horizon {
            return false;
        }
        let root = self.ctx.registry.resolve(index);
        let now = self.lengths[root][stage as usize];
        if now.is_none() {
            return false;
        }
        if stage == 0 {
            return true;
        }
        now > self.lengths[root][stage as usize - 1]
    }
}

/// One row of a learner trace.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub n: u64,
    /// `None` records a no-output gap.
    pub prediction: Option<usize>,
    pub fallback: bool,
    pub cost: Option<Cost>,
    pub deficiency: DeficiencyValue,
}

#[derive(Clone, Debug)]
pub struct LearnerTrace {
    pub stream: BinStr,
    pub entries: Vec<TraceEntry>,
}

impl LearnerTrace {
    pub fn predictions(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.entries.iter().filter_map(|e| e.prediction.map(|p| (e.n, p)))
    }

    pub fn mind_changes(&self) -> u64 {
        let mut changes = 0;
        let mut last: Option<usize> = None;
        for (_, p) in self.predictions() {
            if let Some(prev) = last {
                if prev != p {
                    changes += 1;
                }
            }
            last = Some(p);
        }
        changes
    }

    /// Least `n₀` after which every emitted prediction equals the last one.
    pub fn stabilization_point(&self) -> Option<u64> {
        let (_, last) = self.predictions().last()?;
        let mut point = 0;
        for (n, p) in self.predictions() {
            if p != last {
                point = n + 1;
            }
        }
        Some(point)
    }
}

/// Runs a learner over every prefix of `stream` (lengths `0..=N`), recording
/// prediction, chosen-index cost, and deficiency estimate per step.
pub fn run_trace(ctx: LearnCtx<'_>, learner: &Learner, stream: &BinStr) -> LearnerTrace {
    let table = StreamTable::new(ctx, stream);
    let mut entries = Vec::with_capacity(stream.len() as usize + 1);
    for n in 0..=stream.len() {
        let p = learner.predict_at(&table, n);
        let (cost_col, def_col) = match &p {
            Some(pred) => (
                Some(table.cost_at(pred.index, n, n)),
                table.deficiency_at(pred.index, n, n),
            ),
            None => (None, DeficiencyValue::Undefined),
        };
        entries.push(TraceEntry {
            n,
            prediction: p.map(|q| q.index),
            fallback: p.map(|q| q.fallback).unwrap_or(false),
            cost: cost_col,
            deficiency: def_col,
        });
    }
    LearnerTrace { stream: stream.clone(), entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ExSuccess,
    PartialSuccess,
    Failure,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureReason {
    /// More than one index in the final window.
    Unstable,
    /// The settled index denotes a partial measure.
    PartialPredictedIndex,
    /// Stream deficiency of the settled index exceeds the bound.
    DeficiencyAboveBound,
}

#[derive(Clone, Copy, Debug)]
pub enum DeltaRule {
    /// The settled index itself bounds the deficiency.
    StabilizedIndex,
    Fixed(i64),
}

#[derive(Clone, Debug)]
pub struct ClassifyParams {
    pub window: u64,
    pub delta: DeltaRule,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    pub settled: Option<usize>,
    pub failure: Option<FailureReason>,
    pub mind_changes: u64,
    pub stabilization_point: Option<u64>,
    pub final_deficiency: DeficiencyValue,
}

/// Finite-horizon success classification. Explanatory success needs a
/// constant final window whose index is total with deficiency within the
/// bound; partial success needs exactly one index recurring in the final
/// window with every other index gone before it.
pub fn classify(ctx: LearnCtx<'_>, trace: &LearnerTrace, params: &ClassifyParams) -> Classification {
    let len = trace.entries.len() as u64;
    let window = params.window.min(len).max(1);
    let tail = &trace.entries[(len - window) as usize..];
    let horizon = trace.stream.len();

    let mut seen: Vec<usize> = Vec::new();
    let mut all_emitted = true;
    for e in tail {
        match e.prediction {
            Some(p) => {
                if !seen.contains(&p) {
                    seen.push(p);
                }
            }
            None => all_emitted = false,
        }
    }

    let mut out = Classification {
        verdict: Verdict::Undecided,
        settled: None,
        failure: None,
        mind_changes: trace.mind_changes(),
        stabilization_point: trace.stabilization_point(),
        final_deficiency: DeficiencyValue::Undefined,
    };

    if seen.is_empty() {
        return out;
    }
    if seen.len() > 1 {
        out.verdict = Verdict::Failure;
        out.failure = Some(FailureReason::Unstable);
        return out;
    }

    let z = seen[0];
    out.settled = Some(z);
    out.final_deficiency = stream_deficiency(ctx.registry, ctx.universal, z, &trace.stream, horizon);

    if !ctx.registry.is_total(z) {
        out.verdict = Verdict::Failure;
        out.failure = Some(FailureReason::PartialPredictedIndex);
        return out;
    }

    if all_emitted {
        let bound = match params.delta {
            DeltaRule::StabilizedIndex => z as i64,
            DeltaRule::Fixed(v) => v,
        };
        if out.final_deficiency.at_most(bound) {
            out.verdict = Verdict::ExSuccess;
        } else {
            out.verdict = Verdict::Failure;
            out.failure = Some(FailureReason::DeficiencyAboveBound);
        }
    } else {
        out.verdict = Verdict::PartialSuccess;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binstr::{all_up_to, bs};
    use crate::dyadic::Dyadic;
    use crate::func::IntFn;
    use crate::machine::PrefixFreeMachine;
    use crate::measure::{MeasureKind, Schedule, StagedMeasure};
    use alloc::string::ToString;
    use alloc::vec;
    use num_bigint::BigInt;

    fn dy(num: i64, exp: u64) -> Dyadic {
        Dyadic::new(BigInt::from(num), exp)
    }

    fn linear_uniform() -> StagedMeasure {
        StagedMeasure::uniform(Schedule::linear())
    }

    fn partial_beyond(len: u64) -> StagedMeasure {
        StagedMeasure {
            kind: MeasureKind::Uniform,
            schedule: Schedule { stage_fn: IntFn::Linear { a: 1, b: 0 }, total_upto: Some(len) },
        }
    }

    struct Fixture {
        registry: Registry,
        universal: UniversalMachine,
    }

    impl Fixture {
        fn ctx(&self) -> LearnCtx<'_> {
            LearnCtx { registry: &self.registry, universal: &self.universal }
        }
    }

    fn fixture() -> Fixture {
        let registry = Registry::new(
            vec![
                linear_uniform(),
                StagedMeasure::bernoulli(dy(3, 2), Schedule::linear()),
                partial_beyond(5),
            ],
            1,
        );
        let universal =
            UniversalMachine::new(vec![PrefixFreeMachine::new("m".to_string(), 1)]).unwrap();
        Fixture { registry, universal }
    }

    #[test]
    fn singleton_candidate_wins() {
        let fx = fixture();
        let mut oracle = HighOracle::truthful();
        // Approve only the uniform measure.
        oracle.scripts.insert(1, OracleScript { converge_stage: u64::MAX, pre_value: false });
        oracle.scripts.insert(2, OracleScript { converge_stage: u64::MAX, pre_value: false });
        let p = oracle_ex_learner(fx.ctx(), &oracle, &bs("0101"));
        assert_eq!(p, Prediction { index: 0, fallback: false });
    }

    #[test]
    fn min_cost_beats_min_index() {
        // Two approved totals; give index 0 a big deficiency on a prefix so
        // index 1 ends up cheaper.
        let mut fx = fixture();
        fx.universal.machine_mut(0).request(bs("111111"), 0, 0);
        let oracle = HighOracle::truthful();
        let sigma = bs("11111111");
        let c0 = cost(&fx.registry, &fx.universal, &sigma, 0, 8);
        let c1 = cost(&fx.registry, &fx.universal, &sigma, 1, 8);
        assert!(c1 < c0, "bernoulli should be cheaper: {c1} vs {c0}");
        let p = oracle_ex_learner(fx.ctx(), &oracle, &sigma);
        assert_eq!(p.index, 1);
    }

    #[test]
    fn tie_breaks_to_least_index() {
        let fx = fixture();
        let oracle = HighOracle::truthful();
        // No requests at all: every cost is just the index, so 0 wins.
        let p = oracle_ex_learner(fx.ctx(), &oracle, &bs("0011"));
        assert_eq!(p, Prediction { index: 0, fallback: false });
    }

    #[test]
    fn fallback_when_nothing_approved() {
        let fx = fixture();
        let mut oracle = HighOracle::truthful();
        for i in 0..3 {
            oracle.scripts.insert(i, OracleScript { converge_stage: u64::MAX, pre_value: false });
        }
        let p = oracle_ex_learner(fx.ctx(), &oracle, &bs("01"));
        assert!(p.fallback);
        assert_eq!(p.index, 0);
    }

    #[test]
    fn family_learner_prefers_source_on_biased_stream() {
        // A fixed 200-bit sample from bernoulli(3/4); with ideal-codelength
        // requests along its prefixes the bernoulli member ends up cheaper.
        let mut fx = fixture();
        let stream = crate::sample::sample_stream(&fx.registry, 1, 200, 0).unwrap();
        for m in 1..=stream.len() {
            let sigma = stream.prefix(m);
            let mu = fx.registry.eval_final(1, &sigma).unwrap().unwrap();
            let ideal = mu.ceil_neg_log2().unwrap().max(0) as u64;
            let len = ideal + 2 * crate::func::ceil_log2(m + 1) + 2;
            fx.universal.machine_mut(0).request(sigma, len, m);
        }
        let family = vec![0usize, 1usize];
        let chosen = uniform_family_learner(fx.ctx(), &family, &stream).unwrap();
        assert_eq!(chosen, 1);
        // Permuting the family changes only tie-breaks, not the chosen
        // measure's values on the stream.
        let chosen_rev = uniform_family_learner(fx.ctx(), &[1, 0], &stream).unwrap();
        for sigma in all_up_to(6) {
            assert_eq!(
                fx.registry.eval_final(chosen, &sigma).unwrap(),
                fx.registry.eval_final(chosen_rev, &sigma).unwrap()
            );
        }
        assert!(uniform_family_learner(fx.ctx(), &[], &bs("0")).is_err());
    }

    #[test]
    fn defined_length_caps_at_stage() {
        let fx = fixture();
        assert_eq!(defined_length(&fx.registry, 0, 3), Some(3));
        assert_eq!(defined_length(&fx.registry, 2, 9), Some(5)); // partial beyond 5
        let instant = Registry::new(vec![StagedMeasure::uniform(Schedule::instant())], 0);
        assert_eq!(defined_length(&instant, 0, 4), Some(4));
    }

    #[test]
    fn expansionary_stages() {
        let fx = fixture();
        // Linear schedule: every stage is a record stage.
        for s in 0..8 {
            assert!(is_expansionary(&fx.registry, 0, s));
        }
        // Partial beyond 5: record stages stop once the length tops out.
        assert!(is_expansionary(&fx.registry, 2, 5));
        assert!(!is_expansionary(&fx.registry, 2, 6));
        assert!(!is_expansionary(&fx.registry, 2, 100));
    }

    #[test]
    fn partial_learner_no_output_without_candidates() {
        let fx = fixture();
        // No machine requests: every deficiency is undefined, no i qualifies.
        assert_eq!(partial_learner(fx.ctx(), &bs("0101"), PrefixMode::IndexPrefix), None);
    }

    #[test]
    fn partial_learner_stabilizes_on_hand_simulated_scenario() {
        // μ_0 partial beyond length 5, μ_1 total uniform with linear
        // schedule; stream from the uniform measure. All sufficiently late
        // outputs must equal one fixed padding of index 1.
        let registry = Registry::new(vec![partial_beyond(5), linear_uniform()], 0);
        let mut universal =
            UniversalMachine::new(vec![PrefixFreeMachine::new("m".to_string(), 1)]).unwrap();
        let stream = {
            let tmp = Registry::new(vec![linear_uniform()], 0);
            crate::sample::sample_stream(&tmp, 0, 50, 3).unwrap()
        };
        for m in 1..=stream.len() {
            let sigma = stream.prefix(m);
            let len = m + 2 * crate::func::ceil_log2(m + 1) + 2;
            universal.machine_mut(0).request(sigma, len, m);
        }
        let ctx = LearnCtx { registry: &registry, universal: &universal };
        let mut late = Vec::new();
        for n in 0..=50u64 {
            let sigma = stream.prefix(n);
            if let Some(p) = partial_learner(ctx, &sigma, PrefixMode::IndexPrefix) {
                assert!(registry.is_pad(p));
                if n >= 20 {
                    // Late outputs are paddings of the surviving total index.
                    assert_eq!(registry.resolve(p), 1);
                    late.push(p);
                }
            }
        }
        assert!(!late.is_empty());
        let first = late[0];
        assert!(late.iter().all(|p| *p == first), "late outputs vary: {late:?}");
    }

    #[test]
    fn wrapper_bounds_and_preserves_denotation() {
        let mut fx = fixture();
        let sigma = bs("00000000");
        fx.universal.machine_mut(0).request(sigma.clone(), 2, 0);
        let ctx = LearnCtx { registry: &fx.registry, universal: &fx.universal };
        let d = deficiency(&fx.registry, &fx.universal, 0, &sigma, 8);
        let DeficiencyValue::Finite(dv) = d else { panic!("expected finite deficiency") };
        assert_eq!(dv, 5); // 8 - (2+1)
        let wrapped = strong_wrapper(ctx, 0, &sigma);
        assert!(wrapped as i64 > dv);
        assert_eq!(fx.registry.resolve(wrapped), 0);
        for tau in all_up_to(8) {
            assert_eq!(
                fx.registry.eval(wrapped, &tau, 20).unwrap(),
                fx.registry.eval(0, &tau, 20).unwrap()
            );
        }
    }

    #[test]
    fn classify_constant_trace() {
        let fx = fixture();
        let learner = Learner::new(LearnerSpec::Constant(0), HighOracle::truthful());
        let ctx = fx.ctx();
        let stream = bs("01010101");
        let trace = run_trace(ctx, &learner, &stream);
        let c = classify(ctx, &trace, &ClassifyParams { window: 4, delta: DeltaRule::StabilizedIndex });
        assert_eq!(c.verdict, Verdict::ExSuccess);
        assert_eq!(c.settled, Some(0));
        assert_eq!(c.mind_changes, 0);
    }

    #[test]
    fn classify_alternating_trace_fails() {
        let fx = fixture();
        let ctx = fx.ctx();
        let stream = bs("0101");
        let mut trace = run_trace(
            ctx,
            &Learner::new(LearnerSpec::Constant(0), HighOracle::truthful()),
            &stream,
        );
        for (i, e) in trace.entries.iter_mut().enumerate() {
            e.prediction = Some(i % 2);
        }
        let c = classify(ctx, &trace, &ClassifyParams { window: 4, delta: DeltaRule::StabilizedIndex });
        assert_eq!(c.verdict, Verdict::Failure);
        assert_eq!(c.failure, Some(FailureReason::Unstable));
        assert!(trace.mind_changes() > 0);
    }

    #[test]
    fn classify_partial_index_prediction_fails() {
        let fx = fixture();
        let ctx = fx.ctx();
        let learner = Learner::new(LearnerSpec::Constant(2), HighOracle::truthful());
        let trace = run_trace(ctx, &learner, &bs("000000"));
        let c = classify(ctx, &trace, &ClassifyParams { window: 3, delta: DeltaRule::StabilizedIndex });
        assert_eq!(c.verdict, Verdict::Failure);
        assert_eq!(c.failure, Some(FailureReason::PartialPredictedIndex));
    }

    #[test]
    fn table_path_agrees_with_pure_path() {
        let mut fx = fixture();
        let stream = crate::sample::sample_stream(&fx.registry, 1, 40, 11).unwrap();
        for m in 1..=stream.len() {
            let sigma = stream.prefix(m);
            let mu = fx.registry.eval_final(1, &sigma).unwrap().unwrap();
            let ideal = mu.ceil_neg_log2().unwrap().max(0) as u64;
            fx.universal.machine_mut(0).request(sigma, ideal + 4, m);
        }
        let ctx = LearnCtx { registry: &fx.registry, universal: &fx.universal };
        let mut oracle = HighOracle::truthful();
        oracle.scripts.insert(0, OracleScript { converge_stage: 6, pre_value: false });
        let specs = [
            LearnerSpec::OracleEx,
            LearnerSpec::UniformFamily(vec![0, 1]),
            LearnerSpec::Partial(PrefixMode::IndexPrefix),
            LearnerSpec::Partial(PrefixMode::FullString),
            LearnerSpec::Wrapped(Box::new(LearnerSpec::OracleEx)),
            LearnerSpec::Constant(2),
        ];
        for spec in specs {
            let learner = Learner::new(spec, oracle.clone());
            let table = StreamTable::new(ctx, &stream);
            for n in 0..=stream.len() {
                let sigma = stream.prefix(n);
                assert_eq!(
                    learner.predict_at(&table, n),
                    learner.predict(ctx, &sigma),
                    "spec {:?} diverges at n={n}",
                    learner.spec
                );
                for i in 0..fx.registry.root_count() {
                    assert_eq!(
                        table.cost_at(i, n, n),
                        cost(&fx.registry, &fx.universal, &sigma, i, n)
                    );
                    assert_eq!(
                        table.deficiency_at(i, n, n),
                        deficiency(&fx.registry, &fx.universal, i, &sigma, n)
                    );
                    assert_eq!(table.is_expansionary(i, n), is_expansionary(&fx.registry, i, n));
                }
            }
        }
    }

    #[test]
    fn oracle_prediction_is_cost_minimal_among_approved() {
        let mut fx = fixture();
        fx.universal.machine_mut(0).request(bs("01"), 0, 0);
        fx.universal.machine_mut(0).request(bs("0110"), 1, 2);
        let oracle = HighOracle::truthful();
        for sigma in all_up_to(6) {
            let ctx = LearnCtx { registry: &fx.registry, universal: &fx.universal };
            let p = oracle_ex_learner(ctx, &oracle, &sigma);
            if p.fallback {
                continue;
            }
            assert!(p.index as u64 <= sigma.len());
            let chosen_cost = cost(&fx.registry, &fx.universal, &sigma, p.index, sigma.len());
            let max_i = (fx.registry.root_count() - 1).min(sigma.len() as usize);
            for i in 0..=max_i {
                if oracle.value(&fx.registry, i, sigma.len()) {
                    let ci = cost(&fx.registry, &fx.universal, &sigma, i, sigma.len());
                    assert!(chosen_cost <= ci);
                    if ci == chosen_cost {
                        assert!(p.index <= i);
                    }
                }
            }
        }
    }
}
