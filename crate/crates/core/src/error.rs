use thiserror::Error;

use crate::tree::SiteId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown site {0}")]
    UnknownSite(SiteId),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("term {0} is already represented")]
    DuplicateTerm(String),

    #[error("no matrix registered for label `{label}` at dimension {dim}")]
    UnknownLabel { label: String, dim: usize },

    #[error("dense dimension {dim} exceeds the cap of {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("path count {count} exceeds the cap of {cap}")]
    PathCapExceeded { count: u128, cap: u128 },

    #[error("singular value decomposition did not converge for a {rows}x{cols} matrix")]
    NoConvergence { rows: usize, cols: usize },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
