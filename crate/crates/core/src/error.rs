use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid precision entry {entry:?}: {reason}")]
    InvalidPrecision { entry: String, reason: String },

    #[error("precision vector has no positive entry; Lagrange multipliers cannot be encoded")]
    NoPositivePrecision,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "exact solver refuses {m} variables (cap is {cap}); use the annealing backend instead"
    )]
    TooManyVariables { m: usize, cap: usize },

    #[error("oracle refused: {0}")]
    OracleRefused(String),

    #[error("variable count mismatch for {model}: constructed {actual}, formula gives {expected}")]
    VariableCount {
        model: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: row {row}: {message}")]
    Ingestion {
        path: String,
        row: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
