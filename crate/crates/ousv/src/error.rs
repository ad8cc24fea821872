//! Error type shared across the crate.

/// Errors reported by parameter validation and the simulation drivers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A domain parameter violated its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A subsampling factor does not divide the step count of the path.
    #[error("factor {factor} does not divide step count {m}")]
    NonDivisibleFactor { factor: usize, m: usize },

    /// Adaptive quadrature hit its subdivision cap before reaching tolerance.
    #[error("quadrature did not converge to {tolerance:e} within depth {max_depth}")]
    QuadratureDidNotConverge { tolerance: f64, max_depth: u32 },

    /// An order-fit ladder was too short or not strictly increasing.
    #[error("order-fit ladder needs at least 3 strictly increasing step counts")]
    InvalidLadder,

    /// All per-path errors vanished, so a log-log order fit is undefined.
    #[error("mean errors are zero for m = {m}; order fit is degenerate")]
    DegenerateErrors { m: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
