use thiserror::Error;

/// Errors raised by channel construction and the capacity solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability {value} for `{name}` is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid energy functional: {0}")]
    InvalidEnergy(String),

    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested energy constraint cannot be met by any input distribution.
    #[error(
        "infeasible energy constraint: receivers {receivers:?} cannot be served \
         (largest common constraint B_max = {b_max})"
    )]
    Infeasible { receivers: Vec<usize>, b_max: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("no feasible point on the oracle grid")]
    NoFeasibleGridPoint,
}

pub type Result<T> = std::result::Result<T, Error>;
