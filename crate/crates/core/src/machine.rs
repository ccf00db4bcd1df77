//! Prefix-free compression machines as append-only request logs.
//!
//! A machine accepts a compression request `(σ, codelength)` only while the
//! exact Kraft weight `Σ 2^{-codelength}` stays at most one. `K_M(σ)[s]` is
//! the least accepted codelength for `σ` among requests issued at stages
//! `≤ s`; the universal value adds each machine's coding constant and takes
//! the minimum.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::binstr::BinStr;
use crate::dyadic::Dyadic;

/// One logged compression request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub stage: u64,
    pub sigma: BinStr,
    pub codelength: u64,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequestOutcome {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug)]
pub struct PrefixFreeMachine {
    pub name: String,
    /// Coding constant inside the universal machine.
    pub constant: u64,
    log: Vec<Request>,
    /// Accepted `(stage, codelength)` pairs per string, in request order.
    accepted: BTreeMap<BinStr, Vec<(u64, u64)>>,
    weight: Dyadic,
}

impl PrefixFreeMachine {
    pub fn new(name: String, constant: u64) -> Self {
        PrefixFreeMachine {
            name,
            constant,
            log: Vec::new(),
            accepted: BTreeMap::new(),
            weight: Dyadic::zero(),
        }
    }

    pub fn weight(&self) -> &Dyadic {
        &self.weight
    }

    pub fn log(&self) -> &[Request] {
        &self.log
    }

    /// Issues a request at `stage`. Rejection (weight would exceed one) is a
    /// value, not an error, and leaves the machine unchanged apart from the
    /// log entry.
    pub fn request(&mut self, sigma: BinStr, codelength: u64, stage: u64) -> RequestOutcome {
        let cost = Dyadic::two_pow_neg(codelength);
        let new_weight = self.weight.add(&cost);
        let accepted = new_weight <= Dyadic::one();
        self.log.push(Request { stage, sigma: sigma.clone(), codelength, accepted });
        if accepted {
            self.weight = new_weight;
            self.accepted.entry(sigma).or_default().push((stage, codelength));
            RequestOutcome::Accepted
        } else {
            RequestOutcome::Rejected
        }
    }

    /// `K_M(σ)[s]`: least accepted codelength at stages `≤ s`.
    pub fn k_at(&self, sigma: &BinStr, stage: u64) -> Option<u64> {
        self.accepted
            .get(sigma)?
            .iter()
            .filter(|(s, _)| *s <= stage)
            .map(|(_, len)| *len)
            .min()
    }

    /// Accepted `(stage, codelength)` pairs for a string.
    pub fn accepted_entries(&self, sigma: &BinStr) -> &[(u64, u64)] {
        self.accepted.get(sigma).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Rebuilds a machine from a request log; accepted flags are recomputed
    /// and must match, so a log replays to an identical state.
    pub fn replay(name: String, constant: u64, log: &[Request]) -> Result<Self, ReplayError> {
        let mut m = PrefixFreeMachine::new(name, constant);
        for (i, r) in log.iter().enumerate() {
            let outcome = m.request(r.sigma.clone(), r.codelength, r.stage);
            let accepted = outcome == RequestOutcome::Accepted;
            if accepted != r.accepted {
                return Err(ReplayError { entry: i });
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    pub entry: usize,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "request log entry {} disagrees with recomputed acceptance", self.entry)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReplayError {}

/// Error raised when the declared coding constants are not a Kraft set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantsError {
    pub total: Dyadic,
}

impl fmt::Display for ConstantsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coding constants sum to {} > 1", self.total)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConstantsError {}

/// A finite universal machine: registered machines with coding constants.
#[derive(Clone, Debug)]
pub struct UniversalMachine {
    machines: Vec<PrefixFreeMachine>,
}

impl UniversalMachine {
    pub fn new(machines: Vec<PrefixFreeMachine>) -> Result<Self, ConstantsError> {
        let mut total = Dyadic::zero();
        for m in &machines {
            total = total.add(&Dyadic::two_pow_neg(m.constant));
        }
        if total > Dyadic::one() {
            return Err(ConstantsError { total });
        }
        Ok(UniversalMachine { machines })
    }

    pub fn machines(&self) -> &[PrefixFreeMachine] {
        &self.machines
    }

    pub fn machine(&self, idx: usize) -> &PrefixFreeMachine {
        &self.machines[idx]
    }

    pub fn machine_mut(&mut self, idx: usize) -> &mut PrefixFreeMachine {
        &mut self.machines[idx]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.name == name)
    }

    /// `K(σ)[s] = min_M (K_M(σ)[s] + const_M)`, undefined until some machine
    /// has compressed `σ`.
    pub fn k(&self, sigma: &BinStr, stage: u64) -> Option<u64> {
        self.machines
            .iter()
            .filter_map(|m| m.k_at(sigma, stage).map(|k| k + m.constant))
            .min()
    }

    /// All accepted `(stage, K_M + const_M)` pairs for `σ`, sorted by stage.
    pub fn k_entries(&self, sigma: &BinStr) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        for m in &self.machines {
            for (stage, len) in m.accepted_entries(sigma) {
                out.push((*stage, len + m.constant));
            }
        }
        out.sort_unstable();
        out
    }

    /// Total number of logged requests, used to assert a machine set is
    /// static while a cache built over it is alive.
    pub fn log_len(&self) -> usize {
        self.machines.iter().map(|m| m.log().len()).sum()
    }
}
