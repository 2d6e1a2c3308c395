use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation was requested for a spec kind it does not apply to.
    #[error("not applicable: {0}")]
    Inapplicable(String),

    /// The modulus of continuity does not vanish at 0 or is not positive.
    #[error("degenerate modulus: {0}")]
    DegenerateModulus(String),

    /// A segment or degree cap was exceeded.
    #[error("cap exceeded: {what} = {got} > {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    /// Step refinement did not settle.
    #[error("no convergence after {depth} refinements (last two log-norms {prev}, {last})")]
    NonConvergence { depth: usize, prev: f64, last: f64 },

    /// Any other numerical breakdown (overflow, inconsistent root counts, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Inapplicable(_)
                | Error::DegenerateModulus(_)
                | Error::CapExceeded { .. }
        )
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
