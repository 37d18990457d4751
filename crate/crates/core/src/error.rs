//! Error types shared across the crate.

/// Crate-wide error type.
///
/// The three variants mirror the three ways an evaluation can go wrong:
/// the input lies outside the mathematical domain of the operation, the
/// requested combination is not provided in closed form, or a numerical
/// procedure failed to reach its tolerance.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Input violates a precondition (wrong support, argument outside a
    /// sector, parameter outside the admissible set, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation exists mathematically but is not implemented for this
    /// combination of inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine (quadrature, root finding, extrapolation, Newton
    /// continuation) did not converge to the requested tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
