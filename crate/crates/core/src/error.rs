use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Format(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid label on line {line}: {value}")]
    Label { line: usize, value: String },
    #[error("non-finite feature value")]
    NonFiniteFeature,
    #[error("sequence has zero variance")]
    ZeroVariance,
    #[error("sequence too short: need {needed}, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("band {band} narrower than length difference {diff}")]
    BandTooNarrow { band: usize, diff: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("dataset contains a single class")]
    SingleClass,
    #[error("shape mismatch: expected {expected} columns, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("empty classifier pool")]
    EmptyPool,
    #[error("split leaves a part without both classes: {0}")]
    DegenerateSplit(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
