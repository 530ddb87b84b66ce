//! Brute-force reference computations and seeded instance generators.
//!
//! The reference computations here deliberately avoid the table machinery in
//! [`crate::distribution`]: every quantity is summed over full assignments
//! decoded with plain div/mod arithmetic, so agreement between the two is a
//! meaningful check.

mod brute;
mod generate;

pub use brute::{brute_force_joint, brute_force_kl, decomposition_terms, verify_decomposition, DecompositionTerms};
pub use generate::{
    perturb_mechanism, random_cgm, random_dag, random_environment_set, random_faithful_model, random_joint,
    random_mechanisms, single_target_environment_set, OracleConfig, MAX_ORACLE_VARS, MIN_PROBABILITY,
};
