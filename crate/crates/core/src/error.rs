//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the geometry, engagement and planning routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor was given a value that violates a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An input that must be finite was NaN or infinite.
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    /// A turn angle outside the admissible range for the given pursuer.
    #[error("turn angle {theta} exceeds admissible range |theta| <= {max}")]
    TurnAngleOutOfRange { theta: f64, max: f64 },

    /// A polar bearing that no admissible path can attain.
    #[error("bearing {lambda} not attainable (max |bearing| = {max})")]
    UnreachableBearing { lambda: f64, max: f64 },

    /// The boundary inversion root-finder did not meet its residual tolerance.
    #[error(
        "root-finder failed for bearing {lambda}: residual {residual:e} after {iterations} iterations"
    )]
    RootFindFailed {
        lambda: f64,
        iterations: usize,
        residual: f64,
    },

    /// A caller-supplied argument outside the documented range (e.g. too few samples).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The baseline circumnavigation path cannot be constructed.
    #[error("baseline path infeasible: {0}")]
    InfeasibleBaseline(String),
}

pub type Result<T> = std::result::Result<T, Error>;
