use thiserror::Error;

/// Errors produced by the modelling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid NNTS parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular or ill-conditioned design (condition number {0:.3e})")]
    Singular(f64),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("degenerate branch combination: the two parameter vectors are antipodal")]
    DegenerateCombination,

    #[error("forecast density has no preferred direction (resultant length {0:.3e})")]
    NoPreferredDirection(f64),

    #[error("constant series has zero variance")]
    ZeroVariance,

    #[error("formula error: {0}")]
    Formula(String),

    #[error("data error at line {line}: {msg}")]
    Data { line: usize, msg: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 1 usage error, 2 data error, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Formula(_) => 1,
            Error::Data { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::InvalidInput(_)
            | Error::Dimension(_)
            | Error::InsufficientData(_) => 2,
            Error::InvalidParams(_)
            | Error::Singular(_)
            | Error::Eigen(_)
            | Error::DegenerateCombination
            | Error::NoPreferredDirection(_)
            | Error::ZeroVariance => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
