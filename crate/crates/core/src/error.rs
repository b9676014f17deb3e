use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("point ({x}, {y}) quantizes outside the {width}x{height} grid")]
    OutOfGrid {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("bandwidth {bandwidth} is invalid for side {side} (must be odd, >= 1 and <= side)")]
    InvalidBandwidth { bandwidth: usize, side: usize },

    #[error("index {index} is not an endpoint of a vector of length {len}")]
    NotEndpoint { index: usize, len: usize },

    #[error("landmark index {index} out of range for {len} landmarks")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate normalization distance")]
    DegenerateNormalization,

    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(reason: impl Into<String>) -> Self {
        Error::InvalidConfig(reason.into())
    }
}
