//! Exact laboratory for learning computable probability measures from
//! sampled streams.
//!
//! Everything here is deterministic and dyadic-exact: measure values are
//! rationals with power-of-two denominators, compression machines keep exact
//! Kraft weights, and stage constructions replay bit-identically from their
//! logs. The crate is split into:
//!
//! - [`dyadic`] / [`binstr`] / [`func`]: value domain, string algebra, and
//!   the whitelisted integer functions used for schedules and growth bounds;
//! - [`measure`] / [`registry`] / [`sample`]: staged (possibly partial)
//!   measure programs, the indexed registry with padding and reservation,
//!   and exact seeded stream sampling;
//! - [`machine`] / [`deficiency`] / [`clopen`]: prefix-free request machines,
//!   randomness-deficiency functions, and clopen tests with the compressor;
//! - [`learner`]: the oracle, uniform-family, and partial learners plus the
//!   strong wrapper, trace recording, and window-based classification;
//! - [`sparse`]: the priority construction of a sparse measure together with
//!   its nested covers and test families, and the fixed-point composition;
//! - [`domination`]: extraction of a fast-growing function from a learner and
//!   the exception-set bounds.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod binstr;
pub mod clopen;
pub mod deficiency;
pub mod domination;
pub mod dyadic;
pub mod func;
pub mod learner;
pub mod machine;
pub mod measure;
pub mod registry;
pub mod sample;
pub mod sparse;

pub use binstr::BinStr;
pub use dyadic::Dyadic;
pub use func::IntFn;
pub use measure::{MeasureKind, Schedule, StagedMeasure};
pub use registry::Registry;
