use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),
    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),
    #[error("{0} has zero energy")]
    ZeroEnergy(&'static str),
    #[error("insufficient extrema for envelope construction")]
    InsufficientExtrema,
    #[error("unsupported or malformed WAV: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the content of files rather than arguments.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Format(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
