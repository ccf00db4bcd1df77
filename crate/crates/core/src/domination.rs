//! Extraction of a fast-growing function from a total learner, and the
//! exception sets that make its failure to dominate a computable bound
//! visible as learning failure on a positive-mass set of streams.
//!
//! For each string the search certificate records the least `n > 2|σ|` at
//! which either the predicted measure converged on `2^{≤|σ|}` or the
//! proportion of consistently-predicted extensions fell below `2^{-|σ|-5}`.
//! `f(t)` maxes these over two generations of extensions; the exception set
//! `D_t` enumerates the consistently-predicted survivors where convergence
//! never came, and its constructed-measure mass stays below `2^{-t-5}`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;
use crate::func::IntFn;
use crate::learner::{classify, run_trace, ClassifyParams, LearnCtx, Learner, Verdict};
use crate::measure::prefix_free_reduce;
use crate::sparse::SparseResult;

#[derive(Clone, Copy, Debug)]
pub struct SearchCaps {
    /// Candidate lengths examined past `2|σ|`.
    pub max_candidates: u64,
    /// Survivor frontier size limit.
    pub max_survivor_nodes: u64,
    /// Extension enumerations are refused beyond `2^this`.
    pub max_extension_log2: u64,
}

impl Default for SearchCaps {
    fn default() -> Self {
        SearchCaps { max_candidates: 256, max_survivor_nodes: 1 << 18, max_extension_log2: 22 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertReason {
    /// The predicted measure converged on `2^{≤|σ|}` within `n_σ` steps.
    Converged,
    /// The consistently-predicted proportion dropped below `2^{-|σ|-5}`.
    Churned,
}

#[derive(Clone, Debug)]
pub struct SearchCertificate {
    pub sigma: BinStr,
    pub predicted: usize,
    pub n_sigma: u64,
    pub reason: CertReason,
    /// Survivor count at `n_sigma` (stored for the churned case).
    pub survivors: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DominationError {
    /// Neither disjunct held within the cap: the learner maintains a
    /// never-converging prediction on a thick set of extensions.
    NonConforming { sigma: BinStr, predicted: usize, cap: u64 },
    /// The learner emitted no prediction on a string the search visited.
    LearnerNotTotal { sigma: BinStr },
    SurvivorOverflow { sigma: BinStr },
    ExtensionsTooMany { sigma: BinStr, length: u64 },
    /// The constructed measure is not defined at an exception-set length.
    LambdaUndefined { length: u64 },
}

impl fmt::Display for DominationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DominationError::NonConforming { sigma, predicted, cap } => write!(
                f,
                "non-conforming learner: neither disjunct for {sigma} (prediction {predicted}) within {cap} candidates"
            ),
            DominationError::LearnerNotTotal { sigma } => {
                write!(f, "learner emitted no prediction on {sigma}")
            }
            DominationError::SurvivorOverflow { sigma } => {
                write!(f, "survivor frontier overflow below {sigma}")
            }
            DominationError::ExtensionsTooMany { sigma, length } => {
                write!(f, "extension enumeration of {sigma} to length {length} over cap")
            }
            DominationError::LambdaUndefined { length } => {
                write!(f, "constructed measure undefined at length {length}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DominationError {}

/// Learner access with per-string memoization; certificate searches revisit
/// the same strings across generations.
pub struct DominationRun<'a> {
    pub ctx: LearnCtx<'a>,
    pub learner: &'a Learner,
    pub caps: SearchCaps,
    predictions: BTreeMap<BinStr, Option<usize>>,
    certificates: BTreeMap<BinStr, SearchCertificate>,
}

impl<'a> DominationRun<'a> {
    pub fn new(ctx: LearnCtx<'a>, learner: &'a Learner, caps: SearchCaps) -> Self {
        DominationRun { ctx, learner, caps, predictions: BTreeMap::new(), certificates: BTreeMap::new() }
    }

    pub fn predict(&mut self, sigma: &BinStr) -> Result<usize, DominationError> {
        if let Some(p) = self.predictions.get(sigma) {
            return p.ok_or(DominationError::LearnerNotTotal { sigma: sigma.clone() });
        }
        let p = self.learner.predict(self.ctx, sigma).map(|q| q.index);
        self.predictions.insert(sigma.clone(), p);
        p.ok_or(DominationError::LearnerNotTotal { sigma: sigma.clone() })
    }

    /// Whether `μ_e` is defined on `2^{≤len}` within `steps` stages.
    fn converged(&self, e: usize, len: u64, steps: u64) -> bool {
        match self.ctx.registry.measure(e) {
            Some(m) => m.schedule.defined_at(len, steps),
            None => false,
        }
    }

    /// Certificate for `σ`: the least `n > 2|σ|` at which the predicted
    /// measure converged or the survivor proportion churned away, with
    /// neither disjunct holding at any earlier candidate.
    pub fn find_n_sigma(&mut self, sigma: &BinStr) -> Result<SearchCertificate, DominationError> {
        if let Some(c) = self.certificates.get(sigma) {
            return Ok(c.clone());
        }
        let e = self.predict(sigma)?;
        let base = sigma.len();
        let mut survivors = vec![sigma.clone()];
        let limit = 2 * base + self.caps.max_candidates;
        let mut n = base;
        while n < limit {
            n += 1;
            // Grow the survivor frontier: extensions on which the learner
            // has never changed its mind since σ.
            let mut next = Vec::with_capacity(survivors.len());
            for s in &survivors {
                for bit in [false, true] {
                    let child = s.child(bit);
                    if self.predict(&child)? == e {
                        next.push(child);
                    }
                }
            }
            if next.len() as u64 > self.caps.max_survivor_nodes {
                return Err(DominationError::SurvivorOverflow { sigma: sigma.clone() });
            }
            survivors = next;
            if n <= 2 * base {
                continue;
            }
            let reason = if self.converged(e, base, n) {
                Some(CertReason::Converged)
            } else if proportion_below(survivors.len() as u64, n, base) {
                Some(CertReason::Churned)
            } else {
                None
            };
            if let Some(reason) = reason {
                let cert = SearchCertificate {
                    sigma: sigma.clone(),
                    predicted: e,
                    n_sigma: n,
                    reason,
                    survivors: survivors.len() as u64,
                };
                self.certificates.insert(sigma.clone(), cert.clone());
                return Ok(cert);
            }
        }
        Err(DominationError::NonConforming {
            sigma: sigma.clone(),
            predicted: e,
            cap: self.caps.max_candidates,
        })
    }

    /// Survivor set below `sigma` at length `n`: extensions on which the
    /// prediction never moved off `e`.
    pub fn survivors_at(
        &mut self,
        sigma: &BinStr,
        e: usize,
        n: u64,
    ) -> Result<Vec<BinStr>, DominationError> {
        let mut frontier = vec![sigma.clone()];
        for _ in sigma.len()..n {
            let mut next = Vec::with_capacity(frontier.len());
            for s in &frontier {
                for bit in [false, true] {
                    let child = s.child(bit);
                    if self.predict(&child)? == e {
                        next.push(child);
                    }
                }
            }
            if next.len() as u64 > self.caps.max_survivor_nodes {
                return Err(DominationError::SurvivorOverflow { sigma: sigma.clone() });
            }
            frontier = next;
        }
        Ok(frontier)
    }

    /// `F(σ) = max{n_σ, n_τ : n ∈ (|σ|, n_σ], τ ∈ ext(σ, n)}`.
    pub fn big_f(&mut self, sigma: &BinStr) -> Result<u64, DominationError> {
        let cert = self.find_n_sigma(sigma)?;
        let mut best = cert.n_sigma;
        for n in (sigma.len() + 1)..=cert.n_sigma {
            if n - sigma.len() > self.caps.max_extension_log2 {
                return Err(DominationError::ExtensionsTooMany { sigma: sigma.clone(), length: n });
            }
            for tau in sigma.extensions(n) {
                best = best.max(self.find_n_sigma(&tau)?.n_sigma);
            }
        }
        Ok(best)
    }

    /// `f(t) = max over σ of length t of F(σ)`. Always exceeds `2t`.
    pub fn compute_f(&mut self, t: u64) -> Result<u64, DominationError> {
        let mut best = 0;
        for sigma in BinStr::all_of_length(t) {
            best = best.max(self.big_f(&sigma)?);
        }
        Ok(best)
    }

    /// The exception set at level `t`, following the first applicable
    /// clause per `σ`: (a) skip when `f(t) > h(t)` or the prediction
    /// converged; (b) with no active stage in `(t, n_σ]` enumerate the
    /// survivors at `n_σ`; (c) otherwise pass to the first active stage and
    /// enumerate survivors below its unconverged extensions.
    pub fn build_d_t(
        &mut self,
        t: u64,
        f_t: u64,
        h: &IntFn,
        h_active: &[u64],
    ) -> Result<DtResult, DominationError> {
        let mut result = DtResult {
            t,
            members: Vec::new(),
            clause_histogram: [0; 3],
        };
        if f_t > h.eval(t) {
            result.clause_histogram[0] = 1u64 << t;
            return Ok(result);
        }
        for sigma in BinStr::all_of_length(t) {
            let cert = self.find_n_sigma(&sigma)?;
            let e = cert.predicted;
            if self.converged(e, t, cert.n_sigma) {
                result.clause_histogram[0] += 1;
                continue;
            }
            let active_in_range =
                h_active.iter().copied().find(|&a| a > t && a <= cert.n_sigma);
            match active_in_range {
                None => {
                    result.clause_histogram[1] += 1;
                    let mut survivors = self.survivors_at(&sigma, e, cert.n_sigma)?;
                    result.members.append(&mut survivors);
                }
                Some(n_star) => {
                    result.clause_histogram[2] += 1;
                    if n_star - sigma.len() > self.caps.max_extension_log2 {
                        return Err(DominationError::ExtensionsTooMany {
                            sigma: sigma.clone(),
                            length: n_star,
                        });
                    }
                    for tau in sigma.extensions(n_star) {
                        let tau_cert = self.find_n_sigma(&tau)?;
                        if self.converged(tau_cert.predicted, n_star, tau_cert.n_sigma) {
                            continue;
                        }
                        let mut survivors =
                            self.survivors_at(&tau, tau_cert.predicted, tau_cert.n_sigma)?;
                        result.members.append(&mut survivors);
                    }
                }
            }
        }
        Ok(result)
    }
}

/// `survivors / 2^{n - base} < 2^{-base - 5}`, i.e. count below
/// `2^{n - 2·base - 5}` exactly.
fn proportion_below(survivors: u64, n: u64, base: u64) -> bool {
    let k = n as i64 - 2 * base as i64 - 5;
    if k <= 0 {
        survivors == 0
    } else if k >= 63 {
        true
    } else {
        survivors < (1u64 << k)
    }
}

#[derive(Clone, Debug)]
pub struct DtResult {
    pub t: u64,
    pub members: Vec<BinStr>,
    /// Count of strings resolved by clauses (a), (b), (c).
    pub clause_histogram: [u64; 3],
}

/// One `t` line of the domination report.
#[derive(Clone, Debug)]
pub struct TRow {
    pub t: u64,
    pub f: Option<u64>,
    pub f_error: Option<String>,
    pub h_t: u64,
    pub dt_size: u64,
    pub clause_histogram: [u64; 3],
    pub lambda_dt: Option<Dyadic>,
    pub bound: Dyadic,
    pub bound_ok: Option<bool>,
}

/// Verdict for one sampled stream against the dichotomy.
#[derive(Clone, Debug)]
pub struct StreamCheck {
    pub stream: BinStr,
    pub in_cover: bool,
    pub hit_exception: bool,
    pub f_exceeds_h_somewhere: bool,
    pub failure_witness: Option<String>,
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct DominationReport {
    pub rows: Vec<TRow>,
    pub residual: Option<Dyadic>,
    pub residual_above_half: Option<bool>,
    pub streams: Vec<StreamCheck>,
    pub discrepancies: Vec<String>,
}

/// Runs the full dichotomy check: exact exception-set bounds per `t`,
/// residual cover mass after removing the exception sets, and for every
/// sampled cover stream either a `t` with `f(t) > h(t)` or a recorded
/// learning-failure witness.
#[allow(clippy::too_many_arguments)]
pub fn verify_domination_dichotomy(
    ctx: LearnCtx<'_>,
    learner: &Learner,
    h: &IntFn,
    sparse: &SparseResult,
    t_max: u64,
    caps: SearchCaps,
    streams: &[BinStr],
    classify_params: &ClassifyParams,
) -> DominationReport {
    let mut run = DominationRun::new(ctx, learner, caps);
    let h_active = sparse.active_stage_list();
    let mut rows = Vec::new();
    let mut union: Vec<BinStr> = Vec::new();
    let mut discrepancies = Vec::new();
    let mut any_f_exceeds = false;

    for t in 0..=t_max {
        let bound = Dyadic::two_pow_neg(t + 5);
        let h_t = h.eval(t);
        match run.compute_f(t) {
            Ok(f_t) => {
                if f_t <= 2 * t {
                    discrepancies.push(format!("t={t}: f(t)={f_t} fails the f(t) > 2t bound"));
                }
                if f_t > h_t {
                    any_f_exceeds = true;
                }
                match run.build_d_t(t, f_t, h, &h_active) {
                    Ok(dt) => {
                        let lambda_dt = exception_mass(sparse, &dt.members);
                        let bound_ok = lambda_dt.as_ref().map(|m| *m < bound);
                        if bound_ok == Some(false) {
                            discrepancies.push(format!("t={t}: exception mass reaches the bound"));
                        }
                        if lambda_dt.is_none() {
                            discrepancies
                                .push(format!("t={t}: exception set leaves the measure horizon"));
                        }
                        union.extend(dt.members.iter().cloned());
                        rows.push(TRow {
                            t,
                            f: Some(f_t),
                            f_error: None,
                            h_t,
                            dt_size: dt.members.len() as u64,
                            clause_histogram: dt.clause_histogram,
                            lambda_dt,
                            bound,
                            bound_ok,
                        });
                    }
                    Err(err) => {
                        discrepancies.push(format!("t={t}: exception set failed: {err}"));
                        rows.push(TRow {
                            t,
                            f: Some(f_t),
                            f_error: None,
                            h_t,
                            dt_size: 0,
                            clause_histogram: [0; 3],
                            lambda_dt: None,
                            bound,
                            bound_ok: None,
                        });
                    }
                }
            }
            Err(err) => {
                rows.push(TRow {
                    t,
                    f: None,
                    f_error: Some(format!("{err}")),
                    h_t,
                    dt_size: 0,
                    clause_histogram: [0; 3],
                    lambda_dt: None,
                    bound,
                    bound_ok: None,
                });
            }
        }
    }

    let reduced = prefix_free_reduce(&union);
    let removed = exception_mass(sparse, &reduced);
    let residual = removed.as_ref().map(|m| Dyadic::one().sub(m));
    let residual_above_half = residual.as_ref().map(|r| *r > Dyadic::one().halve());
    if residual_above_half == Some(false) {
        discrepancies.push("residual cover mass at or below one half".into());
    }

    let mut stream_checks = Vec::new();
    for stream in streams {
        let horizon = stream.len().min(sparse.max_stage);
        let in_cover = sparse.law.cover_contains(&stream.prefix(horizon));
        let hit_exception =
            reduced.iter().any(|m| m.len() <= stream.len() && m.is_prefix_of(stream));
        let trace = run_trace(ctx, learner, stream);
        let classification = classify(ctx, &trace, classify_params);
        let failure_witness = match classification.verdict {
            Verdict::ExSuccess => None,
            Verdict::PartialSuccess => None,
            Verdict::Failure => classification.failure.map(|r| format!("{r:?}")),
            Verdict::Undecided => Some("no predictions in the final window".into()),
        };
        let consistent = if in_cover && !hit_exception {
            any_f_exceeds || failure_witness.is_some()
        } else {
            true
        };
        if !consistent {
            discrepancies.push(format!(
                "stream {stream}: in the residual class but neither f > h nor a failure witness"
            ));
        }
        stream_checks.push(StreamCheck {
            stream: stream.clone(),
            in_cover,
            hit_exception,
            f_exceeds_h_somewhere: any_f_exceeds,
            failure_witness,
            consistent,
        });
    }

    DominationReport { rows, residual, residual_above_half, streams: stream_checks, discrepancies }
}

/// Exact constructed-measure mass of a prefix-free exception set; `None`
/// when a member lies beyond the measure's horizon.
fn exception_mass(sparse: &SparseResult, members: &[BinStr]) -> Option<Dyadic> {
    let mut acc = Dyadic::zero();
    for m in members {
        acc = acc.add(&sparse.law.value(m)?);
    }
    Some(acc)
}
