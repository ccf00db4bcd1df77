//! Experiment pipelines: validate, sample, learn, construct-sparse,
//! dominate, and report re-emission. Each one is a deterministic function
//! of the scenario file and the seed offset, and writes its artifacts into
//! the output directory.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use limitlab_core::binstr::BinStr;
use limitlab_core::clopen::{validate_clopen_test, FamilySpace};
use limitlab_core::deficiency::stream_deficiency;
use limitlab_core::domination::{verify_domination_dichotomy, DominationReport, SearchCaps};
use limitlab_core::dyadic::Dyadic;
use limitlab_core::func::{ceil_log2, IntFn};
use limitlab_core::learner::{
    classify, run_trace, ClassifyParams, DeltaRule, LearnCtx, Learner, Verdict,
};
use limitlab_core::measure::validate_measure;
use limitlab_core::sample::sample_stream;
use limitlab_core::sparse::{
    build_sparse, fixed_point_compose, log_line, FixedPointResult, SparseParams, SparseResult,
};

use crate::emit::{
    cost_field, deficiency_field, dyadic_json, json_str, machine_log_jsonl, opt_dyadic_json,
    write_file,
};
use crate::scenario::{CoderMode, DeltaSpec, Scenario};
use crate::CliError;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub seed_offset: u64,
    pub max_stage: Option<u64>,
    pub horizon: Option<u64>,
}

/// What a pipeline concluded; drives the process exit code.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub invariant_failures: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.invariant_failures.is_empty()
    }
}

pub struct StreamRecord {
    pub source: usize,
    pub index: u64,
    pub seed: u64,
    pub stream: BinStr,
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::scenario(format!("scenario is missing {what}")))
}

fn sample_streams(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<StreamRecord>, CliError> {
    let spec = require(scenario.experiment.streams.as_ref(), "experiment.streams")?;
    let length = opts.horizon.unwrap_or(spec.length);
    let mut out = Vec::new();
    for (pos, &source) in spec.sources.iter().enumerate() {
        for k in 0..spec.count {
            let seed = spec.seed + opts.seed_offset + (pos as u64) * spec.count + k;
            let stream = sample_stream(&scenario.registry, source, length, seed)
                .map_err(|e| CliError::invariant(format!("sampling source {source}: {e}")))?;
            out.push(StreamRecord { source, index: k, seed, stream });
        }
    }
    Ok(out)
}

/// Issues idealized-codelength requests for the configured strings: the
/// shortest source ideal plus a log-squared prefix-free envelope.
fn coder_pass(scenario: &mut Scenario, streams: &[StreamRecord]) -> Result<(), CliError> {
    let Some(coder) = &scenario.coder else { return Ok(()) };
    let mut targets: BTreeSet<BinStr> = BTreeSet::new();
    match coder.mode {
        CoderMode::StreamPrefixes => {
            for rec in streams {
                for m in 1..=rec.stream.len() {
                    targets.insert(rec.stream.prefix(m));
                }
            }
        }
        CoderMode::AllStrings => {
            for len in 1..=coder.up_to {
                targets.extend(BinStr::all_of_length(len));
            }
        }
    }
    for sigma in targets {
        let mut best: Option<u64> = None;
        for &src in &coder.sources {
            let value = scenario.registry.eval_final(src, &sigma).unwrap_or(None);
            let ideal = match value {
                Some(v) if !v.is_zero() => v.ceil_neg_log2().unwrap_or(0).max(0) as u64,
                _ => continue,
            };
            best = Some(best.map_or(ideal, |b: u64| b.min(ideal)));
        }
        if let Some(ideal) = best {
            // Length-block envelope: over the finitely many coded levels the
            // per-level weight is at most (#sources)·2^{-⌈log2(n+1)⌉-slack},
            // which keeps the machine far from its Kraft bound.
            let len = ideal + ceil_log2(sigma.len() + 1) + coder.slack;
            let stage = sigma.len();
            scenario.universal.machine_mut(coder.machine).request(sigma, len, stage);
        }
    }
    Ok(())
}

pub fn run_validate(scenario: &Scenario, out: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let max_len = scenario.experiment.validate_len.unwrap_or(8);
    let stage = scenario
        .experiment
        .validate_stage
        .unwrap_or_else(|| opts.max_stage.unwrap_or(1u64 << 32));
    let mut outcome = Outcome::default();
    let mut body = String::new();
    body.push_str("{\"measures\":[");
    for (pos, i) in scenario.registry.filled_roots().iter().enumerate() {
        let m = scenario.registry.measure(*i).unwrap();
        let report = validate_measure(m, max_len, stage);
        if pos > 0 {
            body.push(',');
        }
        let _ = write!(
            body,
            "{{\"index\":{},\"total\":{},\"violations\":[",
            i,
            m.is_total()
        );
        for (vi, v) in report.violations.iter().enumerate() {
            if vi > 0 {
                body.push(',');
            }
            body.push_str(&json_str(&format!("{v}")));
            outcome.invariant_failures.push(format!("measure {i}: {v}"));
        }
        body.push_str("]}");
    }
    let _ = write!(
        body,
        "],\"max_len\":{},\"stage\":{},\"valid\":{}}}",
        max_len,
        stage,
        outcome.ok()
    );
    write_file(out, "validation_report.json", &body)?;
    Ok(outcome)
}

pub fn run_sample(scenario: &Scenario, out: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let streams = sample_streams(scenario, opts)?;
    let mut csv = String::from("source,stream,seed,bits\n");
    for rec in &streams {
        let _ = writeln!(csv, "{},{},{},{}", rec.source, rec.index, rec.seed, rec.stream.as_string());
    }
    write_file(out, "streams.csv", &csv)?;
    let mut summary = String::new();
    let _ = write!(
        summary,
        "{{\"scenario\":{},\"streams\":{}}}",
        json_str(&scenario.name),
        streams.len()
    );
    write_file(out, "summary.json", &summary)?;
    Ok(Outcome::default())
}

#[derive(Clone, Debug)]
pub struct SourceStats {
    pub source: usize,
    pub count: u64,
    pub ex_success: u64,
    pub partial_success: u64,
    pub failure: u64,
    pub undecided: u64,
    pub stabilization_sum: u64,
    pub stabilized_count: u64,
    pub mind_changes_total: u64,
}

pub struct LearnResult {
    pub stats: Vec<SourceStats>,
    pub classifications: Vec<(usize, u64, limitlab_core::learner::Classification)>,
    pub traces: Vec<(usize, u64, limitlab_core::learner::LearnerTrace)>,
}

pub fn run_learn(
    scenario: &mut Scenario,
    out: &Path,
    opts: &RunOptions,
) -> Result<(Outcome, LearnResult), CliError> {
    let spec = require(scenario.learner_spec.clone(), "experiment.learner")?;
    let streams = sample_streams(scenario, opts)?;
    coder_pass(scenario, &streams)?;

    let learner = Learner::new(spec, scenario.oracle.clone());
    let window = scenario.experiment.window.unwrap_or_else(|| {
        scenario.experiment.streams.as_ref().map(|s| (s.length + 1) / 4).unwrap_or(16)
    });
    let delta = match &scenario.experiment.delta {
        Some(DeltaSpec::Fixed { value }) => DeltaRule::Fixed(*value),
        _ => DeltaRule::StabilizedIndex,
    };
    let params = ClassifyParams { window, delta };

    let ctx = LearnCtx { registry: &scenario.registry, universal: &scenario.universal };
    let mut stats: Vec<SourceStats> = Vec::new();
    let mut classifications = Vec::new();
    let mut traces = Vec::new();
    for rec in &streams {
        let trace = run_trace(ctx, &learner, &rec.stream);
        let c = classify(ctx, &trace, &params);
        let entry = stats.iter_mut().find(|s| s.source == rec.source);
        let entry = match entry {
            Some(e) => e,
            None => {
                stats.push(SourceStats {
                    source: rec.source,
                    count: 0,
                    ex_success: 0,
                    partial_success: 0,
                    failure: 0,
                    undecided: 0,
                    stabilization_sum: 0,
                    stabilized_count: 0,
                    mind_changes_total: 0,
                });
                stats.last_mut().unwrap()
            }
        };
        entry.count += 1;
        match c.verdict {
            Verdict::ExSuccess => entry.ex_success += 1,
            Verdict::PartialSuccess => entry.partial_success += 1,
            Verdict::Failure => entry.failure += 1,
            Verdict::Undecided => entry.undecided += 1,
        }
        if let Some(pt) = c.stabilization_point {
            entry.stabilization_sum += pt;
            entry.stabilized_count += 1;
        }
        entry.mind_changes_total += c.mind_changes;
        classifications.push((rec.source, rec.index, c));
        traces.push((rec.source, rec.index, trace));
    }

    // Trace CSV: one row per prefix length per stream.
    let mut csv = String::from("source,stream,n,prediction,fallback,cost,deficiency\n");
    for (source, index, trace) in &traces {
        for e in &trace.entries {
            let prediction = match e.prediction {
                Some(p) => p.to_string(),
                None => "GAP".into(),
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                source,
                index,
                e.n,
                prediction,
                e.fallback,
                cost_field(&e.cost),
                deficiency_field(&e.deficiency)
            );
        }
    }
    write_file(out, "traces.csv", &csv)?;

    let mut cjson = String::from("[");
    for (i, (source, index, c)) in classifications.iter().enumerate() {
        if i > 0 {
            cjson.push(',');
        }
        let _ = write!(
            cjson,
            "{{\"source\":{},\"stream\":{},\"verdict\":{},\"settled\":{},\"mind_changes\":{},\"stabilization\":{},\"deficiency\":{}}}",
            source,
            index,
            json_str(&format!("{:?}", c.verdict)),
            c.settled.map(|s| s.to_string()).unwrap_or_else(|| "null".into()),
            c.mind_changes,
            c.stabilization_point.map(|s| s.to_string()).unwrap_or_else(|| "null".into()),
            json_str(&deficiency_field(&c.final_deficiency)),
        );
    }
    cjson.push(']');
    write_file(out, "classifications.json", &cjson)?;

    let mut summary = String::new();
    let _ = write!(summary, "{{\"scenario\":{},\"per_source\":[", json_str(&scenario.name));
    for (i, s) in stats.iter().enumerate() {
        if i > 0 {
            summary.push(',');
        }
        let _ = write!(
            summary,
            "{{\"source\":{},\"count\":{},\"ex_success\":{},\"partial_success\":{},\"failure\":{},\"undecided\":{},\"stabilization_sum\":{},\"stabilized\":{},\"mind_changes\":{}}}",
            s.source,
            s.count,
            s.ex_success,
            s.partial_success,
            s.failure,
            s.undecided,
            s.stabilization_sum,
            s.stabilized_count,
            s.mind_changes_total
        );
    }
    summary.push_str("]}");
    write_file(out, "summary.json", &summary)?;
    write_file(out, "machine_log.jsonl", &machine_log_jsonl(&scenario.universal))?;

    Ok((Outcome::default(), LearnResult { stats, classifications, traces }))
}

pub struct ConstructResult {
    pub sparse: SparseResult,
    pub fixed_point: Option<FixedPointResult>,
}

pub fn run_construct(
    scenario: &mut Scenario,
    out: &Path,
    opts: &RunOptions,
) -> Result<(Outcome, ConstructResult), CliError> {
    let h = require(scenario.h.clone(), "functions.h")?;
    let p = require(scenario.p.clone(), "functions.p")?;
    let family = require(scenario.experiment.sparse_family.clone(), "experiment.sparse_family")?;
    let max_stage = opts.max_stage.or(scenario.experiment.max_stage);
    let max_stage = require(max_stage, "experiment.max_stage")?;
    let enum_cap = scenario.experiment.enum_cap.unwrap_or(1 << 16);

    let (sparse, fixed_point) = if scenario.experiment.fixed_point {
        let g0 = require(scenario.g0.clone(), "functions.g0 (fixed-point run)")?;
        let machine = scenario
            .universal
            .find("compressor")
            .ok_or_else(|| CliError::scenario("fixed-point run needs a machine named compressor".into()))?;
        let mut families = FamilySpace::new();
        let result = fixed_point_compose(
            &mut scenario.registry,
            &mut scenario.universal,
            machine,
            &mut families,
            h.clone(),
            &g0,
            p.clone(),
            family,
            max_stage,
            enum_cap,
        )
        .map_err(|e| CliError::invariant(format!("fixed-point construction: {e}")))?;
        (result.sparse.clone(), Some(result))
    } else {
        let g = require(scenario.g.clone(), "functions.g")?;
        let sparse = build_sparse(
            &mut scenario.registry,
            SparseParams { h: h.clone(), g, p: p.clone(), family, max_stage, explicit_cap: enum_cap },
        )
        .map_err(|e| CliError::invariant(format!("construction: {e}")))?;
        (sparse, None)
    };

    let mut outcome = Outcome::default();

    // Invariant checks over the finished run.
    for s in 0..=max_stage {
        if !sparse.law.cover_mass(s).is_one() {
            outcome.invariant_failures.push(format!("cover mass differs from one at stage {s}"));
        }
    }
    if !sparse.active_stages_sparse(&p) {
        outcome.invariant_failures.push("active stages are not p-sparse".into());
    }
    for test in &sparse.family.tests {
        for j in 1..test.len() {
            let prev = &test.members[j - 1].mu_at_assignment;
            let cur = &test.members[j].mu_at_assignment;
            if !(*cur <= prev.halve()) {
                outcome
                    .invariant_failures
                    .push(format!("test {}: member {j} does not halve", test.owner));
            }
        }
        let violations = validate_clopen_test(&scenario.registry, test, u64::MAX, enum_cap);
        for v in violations {
            outcome.invariant_failures.push(format!("test {}: {v}", test.owner));
        }
    }
    for (&i, &count) in &sparse.attention {
        let quota = sparse.quotas.get(&i).copied().unwrap_or(0);
        if count > quota {
            outcome.invariant_failures.push(format!("index {i} exceeded its attention quota"));
        }
    }

    // Construction log.
    let mut log = String::new();
    for entry in &sparse.log {
        let _ = writeln!(log, "{}", log_line(entry));
    }
    write_file(out, "construction_log.jsonl", &log)?;

    // Summary with per-test member masses.
    let mut summary = String::new();
    let _ = write!(
        summary,
        "{{\"scenario\":{},\"max_stage\":{},\"active_stages\":[",
        json_str(&scenario.name),
        max_stage
    );
    for (i, (s, idx)) in sparse.active_stages.iter().enumerate() {
        if i > 0 {
            summary.push(',');
        }
        let _ = write!(summary, "[{s},{idx}]");
    }
    summary.push_str("],\"tests\":[");
    for (ti, test) in sparse.family.tests.iter().enumerate() {
        if ti > 0 {
            summary.push(',');
        }
        let _ = write!(summary, "{{\"owner\":{},\"members\":[", test.owner);
        for (j, m) in test.members.iter().enumerate() {
            if j > 0 {
                summary.push(',');
            }
            let _ = write!(
                summary,
                "{{\"j\":{},\"stage\":{},\"mu\":{}}}",
                j,
                m.assigned_stage,
                dyadic_json(&m.mu_at_assignment)
            );
        }
        let certified = sparse.certified.get(&test.owner).copied().unwrap_or(false);
        let _ = write!(summary, "],\"certified\":{certified}}}");
    }
    summary.push_str("],\"attention\":{");
    for (i, (&idx, &count)) in sparse.attention.iter().enumerate() {
        if i > 0 {
            summary.push(',');
        }
        let _ = write!(summary, "\"{idx}\":{count}");
    }
    summary.push_str("},\"horizon_incomplete\":[");
    for (i, idx) in sparse.horizon_incomplete.iter().enumerate() {
        if i > 0 {
            summary.push(',');
        }
        let _ = write!(summary, "{idx}");
    }
    let _ = write!(summary, "],\"lambda_index\":{}", sparse.lambda_index);
    if let Some(fp) = &fixed_point {
        let _ = write!(
            summary,
            ",\"fixed_point\":{{\"family_index\":{},\"coding_constant\":{},\"weight_added\":{},\"g1\":[",
            fp.family_index,
            fp.coding_constant,
            dyadic_json(&fp.weight_added)
        );
        for (i, (e, q)) in fp.g1.iter().enumerate() {
            if i > 0 {
                summary.push(',');
            }
            let _ = write!(summary, "[{e},{q}]");
        }
        summary.push_str("],\"fired\":[");
        let mut first = true;
        for o in &fp.outcomes {
            if o.fired {
                if !first {
                    summary.push(',');
                }
                first = false;
                let _ = write!(
                    summary,
                    "{{\"e\":{},\"k\":{},\"member\":{},\"requests\":{}}}",
                    o.e,
                    o.k,
                    o.target_member,
                    o.requests.len()
                );
            }
        }
        summary.push_str("]}");
    }
    let _ = write!(summary, ",\"valid\":{}}}", outcome.ok());
    write_file(out, "construction_summary.json", &summary)?;
    write_file(out, "machine_log.jsonl", &machine_log_jsonl(&scenario.universal))?;

    Ok((outcome, ConstructResult { sparse, fixed_point }))
}

pub struct DominateResult {
    pub sparse: SparseResult,
    pub report: DominationReport,
}

pub fn run_dominate(
    scenario: &mut Scenario,
    out: &Path,
    opts: &RunOptions,
) -> Result<(Outcome, DominateResult), CliError> {
    let h = require(scenario.h.clone(), "functions.h")?;
    let g = require(scenario.g.clone(), "functions.g")?;
    let p = require(scenario.p.clone(), "functions.p")?;
    let family = require(scenario.experiment.sparse_family.clone(), "experiment.sparse_family")?;
    let max_stage = opts.max_stage.or(scenario.experiment.max_stage);
    let max_stage = require(max_stage, "experiment.max_stage")?;
    let t_max = scenario.experiment.t_max.unwrap_or(6);
    let enum_cap = scenario.experiment.enum_cap.unwrap_or(1 << 16);
    let spec = require(scenario.learner_spec.clone(), "experiment.learner")?;

    let sparse = build_sparse(
        &mut scenario.registry,
        SparseParams { h: h.clone(), g, p: p.clone(), family, max_stage, explicit_cap: enum_cap },
    )
    .map_err(|e| CliError::invariant(format!("construction: {e}")))?;

    // Streams are sampled from the constructed measure.
    let streams_spec = require(scenario.experiment.streams.as_ref(), "experiment.streams")?;
    let length = opts.horizon.unwrap_or(streams_spec.length);
    let mut streams = Vec::new();
    for k in 0..streams_spec.count {
        let seed = streams_spec.seed + opts.seed_offset + k;
        let stream = sample_stream(&scenario.registry, sparse.lambda_index, length, seed)
            .map_err(|e| CliError::invariant(format!("sampling the constructed measure: {e}")))?;
        streams.push(StreamRecord { source: sparse.lambda_index, index: k, seed, stream });
    }
    coder_pass(scenario, &streams)?;

    let caps = match &scenario.experiment.search_caps {
        Some(c) => SearchCaps {
            max_candidates: c.max_candidates,
            max_survivor_nodes: c.max_survivors,
            max_extension_log2: c.max_extension_log2,
        },
        None => SearchCaps::default(),
    };
    let window = scenario.experiment.window.unwrap_or((length + 1) / 4);
    let delta = match &scenario.experiment.delta {
        Some(DeltaSpec::Fixed { value }) => DeltaRule::Fixed(*value),
        _ => DeltaRule::StabilizedIndex,
    };
    let learner = Learner::new(spec, scenario.oracle.clone());
    let ctx = LearnCtx { registry: &scenario.registry, universal: &scenario.universal };
    let stream_strs: Vec<BinStr> = streams.iter().map(|r| r.stream.clone()).collect();
    let report = verify_domination_dichotomy(
        ctx,
        &learner,
        &h,
        &sparse,
        t_max,
        caps,
        &stream_strs,
        &ClassifyParams { window, delta },
    );

    let mut outcome = Outcome::default();
    outcome.invariant_failures.extend(report.discrepancies.iter().cloned());

    // CSV of (t, f(t), h(t)) plus exception-set accounting.
    let mut csv =
        String::from("t,f,h,dt_size,clause_a,clause_b,clause_c,lambda_num,lambda_exp,bound_ok\n");
    for row in &report.rows {
        let f_field = row.f.map(|f| f.to_string()).unwrap_or_default();
        let (lnum, lexp) = match &row.lambda_dt {
            Some(d) => (d.num_string(), d.exponent().to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            row.t,
            f_field,
            row.h_t,
            row.dt_size,
            row.clause_histogram[0],
            row.clause_histogram[1],
            row.clause_histogram[2],
            lnum,
            lexp,
            row.bound_ok.map(|b| b.to_string()).unwrap_or_default()
        );
    }
    write_file(out, "domination.csv", &csv)?;

    let mut rj = String::new();
    let _ = write!(rj, "{{\"scenario\":{},\"rows\":[", json_str(&scenario.name));
    for (i, row) in report.rows.iter().enumerate() {
        if i > 0 {
            rj.push(',');
        }
        let _ = write!(
            rj,
            "{{\"t\":{},\"f\":{},\"f_error\":{},\"h\":{},\"dt_size\":{},\"clauses\":[{},{},{}],\"lambda_dt\":{},\"bound\":{},\"bound_ok\":{}}}",
            row.t,
            row.f.map(|f| f.to_string()).unwrap_or_else(|| "null".into()),
            row.f_error.as_ref().map(|e| json_str(e)).unwrap_or_else(|| "null".into()),
            row.h_t,
            row.dt_size,
            row.clause_histogram[0],
            row.clause_histogram[1],
            row.clause_histogram[2],
            opt_dyadic_json(&row.lambda_dt),
            dyadic_json(&row.bound),
            row.bound_ok.map(|b| b.to_string()).unwrap_or_else(|| "null".into()),
        );
    }
    let _ = write!(
        rj,
        "],\"residual\":{},\"residual_above_half\":{},\"streams\":[",
        opt_dyadic_json(&report.residual),
        report.residual_above_half.map(|b| b.to_string()).unwrap_or_else(|| "null".into()),
    );
    for (i, s) in report.streams.iter().enumerate() {
        if i > 0 {
            rj.push(',');
        }
        let _ = write!(
            rj,
            "{{\"stream\":{},\"in_cover\":{},\"hit_exception\":{},\"f_exceeds_h\":{},\"witness\":{},\"consistent\":{}}}",
            json_str(&s.stream.as_string()),
            s.in_cover,
            s.hit_exception,
            s.f_exceeds_h_somewhere,
            s.failure_witness.as_ref().map(|w| json_str(w)).unwrap_or_else(|| "null".into()),
            s.consistent
        );
    }
    rj.push_str("],\"discrepancies\":[");
    for (i, d) in report.discrepancies.iter().enumerate() {
        if i > 0 {
            rj.push(',');
        }
        rj.push_str(&json_str(d));
    }
    let _ = write!(rj, "],\"discrepancy_free\":{}}}", report.discrepancies.is_empty());
    write_file(out, "domination_report.json", &rj)?;
    write_file(out, "machine_log.jsonl", &machine_log_jsonl(&scenario.universal))?;

    Ok((outcome, DominateResult { sparse, report }))
}

/// Re-renders a stored result directory into a human-readable report;
/// emitting twice yields identical bytes.
pub fn run_report(out: &Path) -> Result<Outcome, CliError> {
    let mut text = String::new();
    for name in ["summary.json", "construction_summary.json", "domination_report.json", "validation_report.json"] {
        let path = out.join(name);
        if let Ok(content) = std::fs::read_to_string(&path) {
            let _ = writeln!(text, "== {name} ==");
            let _ = writeln!(text, "{content}");
        }
    }
    if text.is_empty() {
        return Err(CliError::scenario(format!(
            "no result files found under {}",
            out.display()
        )));
    }
    write_file(out, "report.txt", &text)?;
    Ok(Outcome::default())
}

/// Convenience used by tests: stream deficiency of an index at the horizon.
pub fn final_stream_deficiency(
    scenario: &Scenario,
    index: usize,
    stream: &BinStr,
) -> limitlab_core::deficiency::DeficiencyValue {
    stream_deficiency(&scenario.registry, &scenario.universal, index, stream, stream.len())
}

/// Exact series sum `Σ_{t=0..=n} 2^{-t-k}` used by bound checks in tests.
pub fn geometric_tail(k: u64, n: u64) -> Dyadic {
    let mut acc = Dyadic::zero();
    for t in 0..=n {
        acc = acc.add(&Dyadic::two_pow_neg(t + k));
    }
    acc
}

/// The minimal blocked gap the suspension discipline enforces, used when
/// cross-checking quiet-stage counts.
pub fn min_quiet_stages(max_stage: u64, quota_total: u64, max_suspension: u64) -> u64 {
    max_stage.saturating_sub(quota_total.saturating_mul(1 + max_suspension))
}

#[allow(unused_imports)]
use IntFn as _IntFnKeepalive;
