use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("row {row}, column '{column}': cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column '{0}' not found")]
    MissingColumn(String),

    #[error("need at least 2 rows, found {0}")]
    TooFewRows(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid variable subset: {0}")]
    InvalidSubset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("response is constant (zero variance)")]
    DegenerateResponse,

    #[error("column '{0}' is constant")]
    ConstantColumn(String),

    #[error("{0} is undefined: zero denominator")]
    UndefinedRate(&'static str),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("labels must be 0/1, found {0}")]
    NonBinary(f64),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("exhaustive search would visit {count} subsets (limit {limit})")]
    CombinatorialGuard { count: u128, limit: u128 },

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("module set is empty")]
    EmptyModules,

    #[error("module weights sum to zero")]
    ZeroWeights,

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by degenerate numbers rather than bad input.
    pub fn is_numeric_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateResponse
                | Error::ConstantColumn(_)
                | Error::UndefinedRate(_)
                | Error::SingleClass
                | Error::ZeroWeights
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
