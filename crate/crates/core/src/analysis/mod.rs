//! Exact winning probabilities, residual bounds and equilibrium checks.
//!
//! All values are computed by pushing probability mass forward through the
//! tree of public histories. Nodes whose strategies no longer depend on the
//! raw history are merged when their beliefs are bit-identical, which keeps
//! scenarios with recurring beliefs cheap. Mass that is never resolved within
//! the horizon, together with any pruned mass, is reported as the residual,
//! so `Σ u_i + residual = 1` holds by construction.

mod bounds;
mod deviation;
mod exact;
mod spe;

use thiserror::Error;

use crate::model::ModelError;

pub use bounds::{discount_horizon, horizon_for_bound, residual_bound};
pub use deviation::{closed_form_deviation_value, one_shot_deviation_value, GreedyCertifier};
pub use exact::{
    continuation_win_probs, discounted_values, exact_win_probs, exact_win_probs_with, DiscountReport,
    ExactOptions, ValueReport,
};
pub use spe::{deviation_gains_at, verify_spe, DeviationFinding, DeviationMethod, PlayerGain, SpeOptions, SpeReport, SpeVerdict};

/// Default cap on expanded history nodes per evaluation.
pub const DEFAULT_NODE_LIMIT: usize = 5_000_000;
/// Nodes lighter than this are dropped and their mass added to the residual.
pub const DEFAULT_PRUNE_BELOW: f64 = 1e-40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("history tree exceeds {limit} nodes; lower the horizon or use simpler strategies")]
    TreeTooLarge { limit: usize },
    #[error("ContractViolation: {0}")]
    ContractViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
