use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ions {0} and {1} occupy the same position")]
    CoincidentIons(usize, usize),

    #[error("equilibrium solver did not converge after {iterations} iterations (gradient residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("structural instability: mode {mode} has non-positive eigenvalue {eigenvalue:.6e}")]
    Unstable { mode: usize, eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate drive: unit-amplitude phase {0:.3e} vanishes")]
    DegenerateDrive(f64),

    #[error("fidelity accumulation is not real (imaginary residue {0:.3e})")]
    NonHermitian(f64),

    #[error("integration step {step:.3e} exceeds the stability bound {bound:.3e}")]
    StepControl { step: f64, bound: f64 },

    #[error("polarizabilities {0:.3e} and {1:.3e} share a sign: no zero crossing")]
    NoZeroCrossing(f64, f64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
