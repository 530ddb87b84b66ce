//! Exact computations on discrete causal graphical models observed across
//! several interventional environments.
//!
//! Models are tabular: every variable has a finite cardinality and every
//! joint distribution is held as a dense table. The crate provides DAG
//! utilities ([`graph`]), tables and mechanisms ([`distribution`]),
//! interventional regimes ([`environment`]), the interventional KL
//! divergence and its companions ([`divergence`]), and independent
//! reference implementations with seeded generators ([`oracle`]).

pub mod distribution;
pub mod divergence;
pub mod environment;
pub mod error;
pub mod graph;
pub mod oracle;

pub use distribution::{
    joint_from_model, kl, markov_project, Cgm, ExtendedNonNegative, JointTable, Mechanism, VariableSpace,
};
pub use divergence::{ikl, restricted_ikl, IklReport, DEFAULT_EPSILON};
pub use environment::{Environment, EnvironmentSet, Intervention};
pub use error::{Error, Result};
pub use graph::{Dag, EdgeSet};
