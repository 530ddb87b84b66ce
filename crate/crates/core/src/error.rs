use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by how a caller is expected to react: `Input` and
/// `Structure` mean the arguments are malformed, `Capacity` means a size
/// limit was hit, and `Domain`/`Precondition` mean the inputs are well formed
/// but the requested quantity does not exist for them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("graph structure violated: {0}")]
    Structure(String),

    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("undefined quantity: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("instance generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
