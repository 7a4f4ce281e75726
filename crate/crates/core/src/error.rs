//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (alpha <= 1/2, q outside (0,1), ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A point lies outside the domain of the basis family.
    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    /// An operation needed eigenvalues beyond the enumerated truncation length.
    #[error("truncation exceeded: need eigenvalue index {needed}, spectrum holds {available}")]
    TruncationExceeded { needed: usize, available: usize },

    /// The rejection sampler exhausted its attempt cap.
    #[error("sampling failed: {0}")]
    SamplingFailure(String),

    /// The draw/accept loop exhausted its retry budget without an accepted node set.
    #[error("acceptance failed after {attempts} draws (last spectral deviation {last_deviation})")]
    AcceptanceFailure { attempts: u32, last_deviation: f64 },

    /// A caller violated an operation contract (e.g. solving on a non-accepted node set).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A drawn node reported a zero mixture density value; signals sampler corruption.
    #[error("degenerate node: {0}")]
    DegenerateNode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
