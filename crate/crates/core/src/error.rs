use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of a graph or role assignment is broken.
    #[error("structural error: {0}")]
    Structural(String),

    /// Configuration is incomplete or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A topology cannot be built because some nodes have no legal link.
    #[error("infeasible topology: orphaned nodes {orphans:?}")]
    Infeasible { orphans: Vec<usize> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
