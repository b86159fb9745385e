use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("graph construction: {0}")]
    Graph(String),

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("dense oracle refused: N = {0} exceeds the test-scale limit of {max}", max = crate::spectral::ORACLE_MAX_VERTICES)]
    OracleTooLarge(usize),

    #[error("architecture parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("non-finite gradient in tensor `{0}`")]
    NonFinite(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("idx: bad magic 0x{found:08x} (expected 0x{expected:08x})")]
    IdxMagic { expected: u32, found: u32 },

    #[error("idx: truncated file: {0}")]
    IdxTruncated(String),

    #[error("idx: {images} images but {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error("dataset: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
