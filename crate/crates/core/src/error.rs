use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| entry {0:.3e})")]
    NotHermitian(f64),

    #[error("state vector has zero norm")]
    ZeroNorm,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("eigensolver did not converge")]
    EigenNonConvergence,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generators do not commute (max |[K,G]| entry {0:.3e})")]
    NonCommuting(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error(
        "truncation {given} too small: discarded probability {tail:.3e}, need at least {required} levels"
    )]
    InsufficientTruncation {
        given: usize,
        required: usize,
        tail: f64,
    },

    #[error("series did not converge after {0} terms")]
    SeriesNonConvergence(usize),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("optimizer did not converge after {iters} iterations (best qfi {best_qfi})")]
    NotConverged {
        iters: usize,
        best_qfi: f64,
        amplitudes: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
