use thiserror::Error;

/// Failures raised by the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A pointwise quantity (integrand value, fiber determinant) left its domain.
    #[error("numerical domain error at node {node}: {what}")]
    NumericalDomain { node: usize, what: String },

    /// The density matrix S(x) H^-1 S(x)^* lost rank at a node.
    #[error("degenerate density at node {node}")]
    DegenerateDensity { node: usize },

    /// A Gram matrix failed positive-definiteness or an eigensolve broke down.
    #[error("conditioning failure in {context}: min eigenvalue {min_eigenvalue:e}")]
    Conditioning {
        context: String,
        min_eigenvalue: f64,
    },

    /// Building a derived object produced inconsistent data.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
