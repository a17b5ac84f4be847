//! Closed-form evaluators for every identity family.

mod chain;
mod gosper;
mod lattice;
mod solve;

pub use chain::{
    chain_absorbed_cdf, chain_identity_terms, chain_position_prob, delay_compositions,
    multilevel_absorbed_cdf, multilevel_level_prob, multilevel_position_prob, ChainEvaluator,
    DelayComposition,
};
pub use gosper::{gosper_terms, gosper_total, GosperParams};
pub(crate) use lattice::check_quadrant_probs;
pub use lattice::{
    chain2d_barrier_prob, chain2d_identity_terms, chain2d_point_prob, simple1d_point_prob,
    simple1d_total, walk2d_distribution, walk2d_identity_total, walk2d_point_prob,
    walk2d_state_prob, CoefficientMode,
};
pub use solve::enumerate_solutions;
