use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "power iteration did not converge after {iterations} iterations \
         (estimate {estimate:e}, relative change {residual:e})"
    )]
    NotConverged {
        iterations: usize,
        estimate: f64,
        residual: f64,
        /// Last normalized iterate.
        iterate: Vec<f64>,
    },

    #[error("matrix is not positive semidefinite: eigenvalue {value:e} below tolerance")]
    NotPsd { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has no nonzero row")]
    ZeroMatrix,

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported matrix market format: {0}")]
    UnsupportedFormat(String),

    #[error("duplicate matrix market entry ({row}, {col}) at line {line}")]
    DuplicateEntry { row: usize, col: usize, line: usize },

    #[error("solver diverged at epoch {epoch}: objective {objective:e}")]
    Diverged { epoch: f64, objective: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
