use thiserror::Error;

/// Errors raised by the moment engines, bounds and verification checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient vector must be non-empty")]
    EmptyCoefficients,

    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },

    #[error("enumeration needs 2^(n-1) sign patterns; n = {n} exceeds the cap of {cap}, use Monte Carlo")]
    EnumerationCapacity { n: usize, cap: usize },

    #[error(
        "partial fractions degenerate: relative gap {gap:e} between squared coefficients is below {threshold:e}, use Monte Carlo"
    )]
    PartialFractionDegenerate { gap: f64, threshold: f64 },

    #[error("partial fractions ill-conditioned: sum of |residues| = {magnitude:e} exceeds {limit:e}, use Monte Carlo")]
    PartialFractionCancellation { magnitude: f64, limit: f64 },

    #[error("quadrature did not converge after {intervals} subintervals (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { intervals: usize, estimate: f64, error: f64 },

    #[error("dual-norm supremum is unbounded")]
    UnboundedSupremum,

    #[error("{0}")]
    Capacity(String),
}

impl Error {
    /// True for refusals that a caller can route around with a different engine.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::EnumerationCapacity { .. }
                | Error::PartialFractionDegenerate { .. }
                | Error::PartialFractionCancellation { .. }
                | Error::Capacity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
