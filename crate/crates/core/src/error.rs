//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not unitary: ||U*U - I||_F = {gram_residual:.3e} exceeds {tol:.3e}")]
    NotUnitary { gram_residual: f64, tol: f64 },

    #[error("input trace is not zero: |trace| = {trace_abs:.3e} exceeds {tol:.3e} * ||A||_F")]
    NotTraceZero { trace_abs: f64, tol: f64 },

    #[error("diagonal entry {index} is nonzero ({value:.3e}); a zero-diagonal matrix is required")]
    NonZeroDiagonal { index: usize, value: f64 },

    #[error("zero input matrix cannot be factored")]
    ZeroInput,

    #[error("dimension {dim} is not a power of 4")]
    NotPowerOfFour { dim: usize },

    #[error("dimension {dim} does not have the form 2*4^n")]
    NotTwicePowerOfFour { dim: usize },

    #[error("epsilon schedule has {have} levels but {need} are required")]
    ScheduleTooShort { have: usize, need: usize },

    #[error("spectra coincide: left[{i}] == right[{j}] = {value}")]
    CoincidentSpectra { i: usize, j: usize, value: String },

    #[error("diagonal entries {i} and {j} coincide ({value})")]
    RepeatedDiagonal { i: usize, j: usize, value: String },

    #[error("no axis-aligned rectangle separates the spectra at margin {margin}")]
    NoSeparatingRectangle { margin: f64 },

    #[error("quadrature did not stabilize below {target:.3e} within {max_nodes} nodes per edge")]
    QuadratureNonConvergence { target: f64, max_nodes: usize },

    #[error("isotropic-vector tolerance {tol:.3e} unattained: best |x*Ax| = {achieved:.3e} * ||A||_F")]
    ToleranceUnattained { tol: f64, achieved: f64 },

    #[error("spectral separation lost during merge: gap {gap:.3e} < {required:.3e}")]
    SeparationFailure { gap: f64, required: f64 },

    #[error("infeasible paving request: {0}")]
    InfeasiblePaving(String),

    #[error("file parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code mandated for this error class
    /// (0 verified, 2 invalid input, 3 solver failure, 4 I/O error).
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) => 4,
            Error::QuadratureNonConvergence { .. }
            | Error::ToleranceUnattained { .. }
            | Error::SeparationFailure { .. } => 3,
            _ => 2,
        }
    }
}
