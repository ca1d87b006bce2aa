//! Error taxonomy shared by all modules.
//!
//! Hypothesis failures are ordinary data for the verdict machinery (a theorem
//! can legitimately not apply to a scene); they only become process errors at
//! the CLI boundary, where they map to exit code 2.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Scene file or field fails validation; `path` is the JSON field path.
    #[error("invalid scene at `{path}`: {message}")]
    InvalidScene { path: String, message: String },

    /// A documented precondition of an operation does not hold.
    #[error("hypothesis not met ({check}): {detail}")]
    HypothesesUnmet { check: String, detail: String },

    /// Configuration that is schema-valid but mathematically inconsistent
    /// (e.g. synthetic dimension m = n with a nonconstant weight).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Point outside the model chart, parameter outside its domain, etc.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation not defined for this ambient/hypersurface combination.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Numerical machinery failed its own accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Singular first fundamental form or collapsed radius; `node` is the
    /// parameter location (angle tuple) of the offending quadrature node.
    #[error("degenerate immersion at node {node}: {detail}")]
    DegenerateImmersion { node: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
