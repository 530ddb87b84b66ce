//! Interventional KL machinery: chain-rule decompositions, the IKL and its
//! restricted form, sufficiency checks for structural identification, the
//! estimation bound, and edge orientation over a Markov equivalence class.

mod bound;
mod conditions;
mod decomposition;
mod ikl;
mod orient;

pub use bound::{estimation_bound_report, BoundReport, BoundedStatistic, EnvironmentDeviation, ROUNDOFF_SLACK};
pub use conditions::{
    check_sufficient_conditions, flipped_edge_change_predicate, ChangePrediction, ConditionReport, EdgeCondition,
    SufficientCondition, Witness,
};
pub use decomposition::{decompose_kl_general, decompose_kl_shared, KlDecomposition};
pub use ikl::{ikl, restricted_ikl, EnvironmentTerms, IklReport};
pub use orient::{orient_edges, GraphScore, OrientationReport, OrientationTerm};

/// Threshold below which a divergence counts as zero.
pub const DEFAULT_EPSILON: f64 = 1e-9;
