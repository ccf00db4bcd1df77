//! Scenario files: the single self-contained unit of reproducibility.
//!
//! A scenario declares the measure registry (with reservable dynamic
//! slots), machine coding constants, the growth functions, oracle scripts,
//! an optional coding pass, and the experiment block. Everything a pipeline
//! does is a function of this file plus the command-line seed offset.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use limitlab_core::binstr::BinStr;
use limitlab_core::dyadic::Dyadic;
use limitlab_core::func::IntFn;
use limitlab_core::learner::{HighOracle, LearnerSpec, OracleScript, PrefixMode};
use limitlab_core::machine::{PrefixFreeMachine, UniversalMachine};
use limitlab_core::measure::{MeasureKind, Schedule, StagedMeasure, TreeExtend};
use limitlab_core::registry::Registry;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    pub registry: RegistryBlock,
    #[serde(default)]
    pub machines: Vec<MachineSpec>,
    #[serde(default)]
    pub functions: FunctionBlock,
    #[serde(default)]
    pub oracle: OracleBlock,
    #[serde(default)]
    pub coder: Option<CoderSpec>,
    #[serde(default)]
    pub experiment: ExperimentBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryBlock {
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub dynamic_slots: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: KindSpec,
    pub schedule: ScheduleSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KindSpec {
    Uniform,
    Bernoulli { q: DyadicSpec },
    FiniteTree { nodes: Vec<NodeSpec>, depth: u64, extend: ExtendSpec },
    Mixture { components: Vec<ComponentSpec> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub sigma: String,
    pub value: DyadicSpec,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtendSpec {
    Undefined,
    HalfSplit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: DyadicSpec,
    pub kind: Box<KindSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicSpec {
    pub num: i64,
    pub exp: u64,
}

impl DyadicSpec {
    pub fn to_dyadic(&self) -> Dyadic {
        Dyadic::ratio(self.num, self.exp)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(rename = "fn")]
    pub stage_fn: FnSpec,
    #[serde(default)]
    pub total_upto: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FnSpec {
    Const { value: u64 },
    Linear { a: u64, b: u64 },
    Poly { coeffs: Vec<u64> },
    Exp { base: u64, scale: u64, offset: u64 },
    Table { values: Vec<u64>, beyond: Box<FnSpec> },
}

impl FnSpec {
    pub fn to_fn(&self) -> IntFn {
        match self {
            FnSpec::Const { value } => IntFn::Const(*value),
            FnSpec::Linear { a, b } => IntFn::Linear { a: *a, b: *b },
            FnSpec::Poly { coeffs } => IntFn::Poly(coeffs.clone()),
            FnSpec::Exp { base, scale, offset } => {
                IntFn::Exp { base: *base, scale: *scale, offset: *offset }
            }
            FnSpec::Table { values, beyond } => {
                IntFn::Table { values: values.clone(), beyond: Box::new(beyond.to_fn()) }
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpecBlockPlaceholder {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub name: String,
    pub constant: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionBlock {
    pub h: Option<FnSpec>,
    pub g: Option<FnSpec>,
    pub p: Option<FnSpec>,
    pub g0: Option<FnSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    #[serde(default)]
    pub scripts: Vec<ScriptSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    pub index: usize,
    pub converge_stage: u64,
    #[serde(default)]
    pub pre_value: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoderSpec {
    pub machine: String,
    pub mode: CoderMode,
    pub sources: Vec<usize>,
    #[serde(default)]
    pub up_to: Option<u64>,
    #[serde(default = "default_slack")]
    pub slack: u64,
}

fn default_slack() -> u64 {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoderMode {
    StreamPrefixes,
    AllStrings,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(default)]
    pub learner: Option<LearnerSpecFile>,
    #[serde(default)]
    pub streams: Option<StreamsSpec>,
    #[serde(default)]
    pub window: Option<u64>,
    #[serde(default)]
    pub delta: Option<DeltaSpec>,
    #[serde(default)]
    pub max_stage: Option<u64>,
    #[serde(default)]
    pub t_max: Option<u64>,
    #[serde(default)]
    pub search_caps: Option<CapsSpec>,
    #[serde(default)]
    pub enum_cap: Option<u64>,
    #[serde(default)]
    pub sparse_family: Option<Vec<usize>>,
    #[serde(default)]
    pub fixed_point: bool,
    #[serde(default)]
    pub validate_len: Option<u64>,
    #[serde(default)]
    pub validate_stage: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearnerSpecFile {
    OracleEx,
    UniformFamily { family: Vec<usize> },
    Partial { prefix_mode: PrefixModeSpec },
    Wrapped { inner: Box<LearnerSpecFile> },
    Constant { index: usize },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefixModeSpec {
    Index,
    Full,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamsSpec {
    pub sources: Vec<usize>,
    pub count: u64,
    pub length: u64,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaSpec {
    StabilizedIndex,
    Fixed { value: i64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsSpec {
    pub max_candidates: u64,
    pub max_survivors: u64,
    #[serde(default = "default_ext_log2")]
    pub max_extension_log2: u64,
}

fn default_ext_log2() -> u64 {
    22
}

/// A loaded, validated scenario with core structures built.
#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub registry: Registry,
    pub universal: UniversalMachine,
    pub oracle: HighOracle,
    pub h: Option<IntFn>,
    pub g: Option<IntFn>,
    pub p: Option<IntFn>,
    pub g0: Option<IntFn>,
    pub coder: Option<CoderConfig>,
    pub experiment: ExperimentBlock,
    pub learner_spec: Option<LearnerSpec>,
}

#[derive(Debug)]
pub struct CoderConfig {
    pub machine: usize,
    pub mode: CoderMode,
    pub sources: Vec<usize>,
    pub up_to: u64,
    pub slack: u64,
}

fn build_kind(spec: &KindSpec, at: &str) -> Result<MeasureKind, CliError> {
    match spec {
        KindSpec::Uniform => Ok(MeasureKind::Uniform),
        KindSpec::Bernoulli { q } => {
            let q = q.to_dyadic();
            if q.is_negative() || q > Dyadic::one() {
                return Err(CliError::scenario(format!("{at}: bernoulli bias out of [0,1]")));
            }
            Ok(MeasureKind::Bernoulli(q))
        }
        KindSpec::FiniteTree { nodes, depth, extend } => {
            let mut map = BTreeMap::new();
            for (i, node) in nodes.iter().enumerate() {
                let sigma = BinStr::parse(&node.sigma).ok_or_else(|| {
                    CliError::scenario(format!("{at}.nodes[{i}]: malformed string"))
                })?;
                if sigma.len() > *depth {
                    return Err(CliError::scenario(format!(
                        "{at}.nodes[{i}]: node longer than the declared depth"
                    )));
                }
                map.insert(sigma, node.value.to_dyadic());
            }
            let extend = match extend {
                ExtendSpec::Undefined => TreeExtend::Undefined,
                ExtendSpec::HalfSplit => TreeExtend::HalfSplit,
            };
            Ok(MeasureKind::FiniteTree { nodes: map, depth: *depth, extend })
        }
        KindSpec::Mixture { components } => {
            let mut parts = Vec::new();
            let mut total = Dyadic::zero();
            for (i, c) in components.iter().enumerate() {
                let w = c.weight.to_dyadic();
                total = total.add(&w);
                parts.push((w, build_kind(&c.kind, &format!("{at}.components[{i}]"))?));
            }
            if !total.is_one() {
                return Err(CliError::scenario(format!("{at}: mixture weights sum to {total} ≠ 1")));
            }
            Ok(MeasureKind::Mixture(parts))
        }
    }
}

fn check_index(idx: usize, roots: usize, at: &str) -> Result<(), CliError> {
    if idx >= roots {
        return Err(CliError::scenario(format!(
            "{at}: dangling index {idx} (root capacity {roots})"
        )));
    }
    Ok(())
}

fn build_learner_spec(
    spec: &LearnerSpecFile,
    roots: usize,
    at: &str,
    registry: &Registry,
) -> Result<LearnerSpec, CliError> {
    match spec {
        LearnerSpecFile::OracleEx => Ok(LearnerSpec::OracleEx),
        LearnerSpecFile::UniformFamily { family } => {
            for (i, &m) in family.iter().enumerate() {
                check_index(m, roots, &format!("{at}.family[{i}]"))?;
                if !registry.is_total(m) {
                    return Err(CliError::scenario(format!(
                        "{at}.family[{i}]: member {m} is not total"
                    )));
                }
            }
            if family.is_empty() {
                return Err(CliError::scenario(format!("{at}: empty family")));
            }
            Ok(LearnerSpec::UniformFamily(family.clone()))
        }
        LearnerSpecFile::Partial { prefix_mode } => Ok(LearnerSpec::Partial(match prefix_mode {
            PrefixModeSpec::Index => PrefixMode::IndexPrefix,
            PrefixModeSpec::Full => PrefixMode::FullString,
        })),
        LearnerSpecFile::Wrapped { inner } => Ok(LearnerSpec::Wrapped(Box::new(
            build_learner_spec(inner, roots, &format!("{at}.inner"), registry)?,
        ))),
        LearnerSpecFile::Constant { index } => {
            check_index(*index, roots, &format!("{at}.index"))?;
            Ok(LearnerSpec::Constant(*index))
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::scenario(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| CliError::scenario(format!("{}: {e}", path.display())))?;
    build_scenario(file, path)
}

fn build_scenario(file: ScenarioFile, path: &Path) -> Result<Scenario, CliError> {
    let horizon_guess = file.experiment.max_stage.unwrap_or(256).max(256);

    // Registry block.
    let mut measures = Vec::new();
    for (i, spec) in file.registry.measures.iter().enumerate() {
        let at = format!("registry.measures[{i}]");
        let kind = build_kind(&spec.kind, &at)?;
        let schedule = Schedule {
            stage_fn: spec.schedule.stage_fn.to_fn(),
            total_upto: spec.schedule.total_upto,
        };
        if !schedule.stage_fn.is_nondecreasing_up_to(horizon_guess) {
            return Err(CliError::scenario(format!("{at}.schedule: stage function decreases")));
        }
        measures.push(StagedMeasure { kind, schedule });
    }
    let registry = Registry::new(measures, file.registry.dynamic_slots);
    let roots = registry.root_count();
    if roots == 0 {
        return Err(CliError::scenario("registry: no measures declared".into()));
    }

    // Machine block: the coding constants must satisfy the Kraft bound.
    let mut machines = Vec::new();
    let mut names = Vec::new();
    for (i, m) in file.machines.iter().enumerate() {
        if names.contains(&m.name) {
            return Err(CliError::scenario(format!("machines[{i}]: duplicate name {}", m.name)));
        }
        names.push(m.name.clone());
        machines.push(PrefixFreeMachine::new(m.name.clone(), m.constant));
    }
    let universal = UniversalMachine::new(machines)
        .map_err(|e| CliError::scenario(format!("machines: {e}")))?;

    // Oracle scripts refer to real indices.
    let mut oracle = HighOracle::truthful();
    for (i, s) in file.oracle.scripts.iter().enumerate() {
        check_index(s.index, roots, &format!("oracle.scripts[{i}]"))?;
        oracle.scripts.insert(
            s.index,
            OracleScript { converge_stage: s.converge_stage, pre_value: s.pre_value },
        );
    }

    // Coder block.
    let coder = match &file.coder {
        None => None,
        Some(c) => {
            let machine = universal
                .find(&c.machine)
                .ok_or_else(|| CliError::scenario(format!("coder: unknown machine {}", c.machine)))?;
            for (i, &s) in c.sources.iter().enumerate() {
                check_index(s, roots, &format!("coder.sources[{i}]"))?;
            }
            if c.mode == CoderMode::AllStrings && c.up_to.is_none() {
                return Err(CliError::scenario("coder: all-strings mode needs up_to".into()));
            }
            Some(CoderConfig {
                machine,
                mode: c.mode,
                sources: c.sources.clone(),
                up_to: c.up_to.unwrap_or(0),
                slack: c.slack,
            })
        }
    };

    // Experiment block references.
    if let Some(streams) = &file.experiment.streams {
        for (i, &s) in streams.sources.iter().enumerate() {
            check_index(s, roots, &format!("experiment.streams.sources[{i}]"))?;
        }
    }
    if let Some(family) = &file.experiment.sparse_family {
        for (i, &s) in family.iter().enumerate() {
            check_index(s, roots, &format!("experiment.sparse_family[{i}]"))?;
        }
    }
    let learner_spec = match &file.experiment.learner {
        Some(l) => Some(build_learner_spec(l, roots, "experiment.learner", &registry)?),
        None => None,
    };

    let name = file.name.clone().unwrap_or_else(|| {
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into())
    });

    Ok(Scenario {
        name,
        registry,
        universal,
        oracle,
        h: file.functions.h.as_ref().map(FnSpec::to_fn),
        g: file.functions.g.as_ref().map(FnSpec::to_fn),
        p: file.functions.p.as_ref().map(FnSpec::to_fn),
        g0: file.functions.g0.as_ref().map(FnSpec::to_fn),
        coder,
        experiment: file.experiment,
        learner_spec,
    })
}
