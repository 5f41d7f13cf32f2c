use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] sparsegen::Error),
    #[error("IDX: bad magic {found:#010x}, expected 0x00000803")]
    IdxMagic { found: u32 },
    #[error("IDX: truncated payload, need {needed} bytes but have {available}")]
    IdxTruncated { needed: usize, available: usize },
    #[error("IDX: dimension mismatch: {0}")]
    IdxDims(String),
    #[error("{0}")]
    Invalid(String),
    #[error("algorithm '{0}' needs generator weights")]
    MissingWeights(String),
    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),
    #[error("CSV is missing column '{0}'")]
    MissingColumn(String),
    #[error("no data: {0}")]
    Empty(String),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

impl HarnessError {
    /// Process exit code: 1 usage, 2 data or format, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use sparsegen::Error as E;
        match self {
            Self::Core(E::NonFinite(_)) => 3,
            Self::Core(E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::ScaleLimit(_)) => 1,
            Self::Core(_) => 2,
            Self::Invalid(_) | Self::MissingWeights(_) | Self::UnknownAlgorithm(_) => 1,
            _ => 2,
        }
    }
}
