use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |A - A^H| entry = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("operator has a negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tensor dimension {requested} exceeds the cap of {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("Hermitian eigen-solver failed to converge (dimension {dim})")]
    EigenFailure { dim: usize },

    #[error(
        "function is singular at a zero eigenvalue ({eigenvalue:e}); restrict it to the support"
    )]
    SingularFunction { eigenvalue: f64 },

    #[error("reference state is singular (min eigenvalue {min_eigenvalue:e}); sanitize the channel first")]
    SingularReference { min_eigenvalue: f64 },

    #[error("invalid input distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unusable channel: {0}")]
    UnusableChannel(String),

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("quadratic program failed: {0}")]
    QuadraticProgram(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("channel file: {0}")]
    Format(String),
}
