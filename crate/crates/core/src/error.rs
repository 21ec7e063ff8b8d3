use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("no zero mode found (smallest |eps| = {smallest:e})")]
    ZeroModeMissing { smallest: f64 },

    #[error("degenerate Neel mapping: |C_1| = {0:e}")]
    DegenerateMapping(f64),

    #[error("numerical consistency violated: {0}")]
    Consistency(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit failed: {0}")]
    FitFailure(String),

    #[error("insufficient bootstrap resamples: {0} (need at least 20)")]
    InsufficientResamples(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dataset at {path} was produced by a different configuration (hash {found}, expected {expected})")]
    ConfigMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("unknown selector key `{0}`")]
    Selector(String),

    #[error("missing records for (L, g): {0:?}")]
    MissingRecords(Vec<(usize, f64)>),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
