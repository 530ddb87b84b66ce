//! Exact discrete probability machinery over dense tables.

mod joint;
mod kl;
mod markov;
mod mechanism;
mod model;
mod space;

pub use joint::{JointTable, JOINT_SUM_TOLERANCE};
pub use kl::{expected_conditional_kl, expected_conditional_kl_to_mechanism, kl, ExtendedNonNegative};
pub use markov::{
    conditional_mutual_information, is_faithful, is_faithful_with_limit, is_markov, markov_project,
    markov_projection_model, DEFAULT_FAITHFULNESS_LIMIT,
};
pub use mechanism::{Mechanism, ROW_SUM_TOLERANCE};
pub use model::{joint_from_model, Cgm};
pub use space::{cell_limit, VariableSpace, CELL_LIMIT_ENV, DEFAULT_CELL_LIMIT};

pub(crate) use space::sorted_set;
