//! Exact arithmetic, closed-form evaluators, and executable oracles for
//! combinatorial identities over delayed Markov chains and lattice walks.
//!
//! Every probability is an exact rational. Closed forms are checked against
//! a tick-by-tick simulation of the same process, never against themselves.

pub mod arith;
pub mod checker;
pub mod closed_form;
pub mod error;
pub mod model;
pub mod oracle;

pub use arith::{binomial, choose, multinomial, Probability, Rational};
pub use checker::{
    adjudicate, check_identity, sweep, Adjudication, IdentityId, IdentityParams, IdentityReport,
    MRange, OracleDiff, SweepGrid, SweepResult, Verdict,
};
pub use closed_form::CoefficientMode;
pub use error::{Error, Result};
pub use model::{BarrierSpec, ChainSpec, LatticePoint, Model, ModelFile, MoveRule, Walk2DSpec};
pub use oracle::{Snapshot, StateLabel};
