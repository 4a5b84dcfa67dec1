use thiserror::Error;

use crate::eigen::GroundStateResult;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    #[error("sector {sector} admits no basis states under the given cutoffs")]
    EmptySector { sector: i64 },

    #[error("basis dimension exceeds the cap of {cap} states")]
    DimensionOverflow { cap: usize },

    #[error("site {site} is out of range for {n_dimers} dimer(s)")]
    SiteOutOfRange { site: usize, n_dimers: usize },

    #[error("matrix element leaves sector {expected} (reached {found})")]
    SectorMismatch { expected: i64, found: i64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        partial: Box<GroundStateResult>,
    },

    #[error("state of length {state} does not match basis of dimension {basis}")]
    BasisMismatch { state: usize, basis: usize },

    #[error("variance {0:e} is negative beyond rounding")]
    NegativeVariance(f64),

    #[error("polariton polynomial has a complex root {re:e} + {im:e}i")]
    ComplexRoots { re: f64, im: f64 },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("closed form requires B = 0, got B = {0}")]
    NonzeroB(f64),

    #[error("plane-wave basis unconverged: ground energy moved by {change:e} on doubling")]
    GridTooCoarse { change: f64 },

    #[error("block size {requested} exceeds the configured maximum {max}")]
    BlockTooLarge { requested: usize, max: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        field,
        reason: reason.into(),
    }
}
