use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bandwidth {bandwidth_hz} Hz exceeds limit {limit_hz} Hz at this sample rate")]
    InvalidBandwidth { bandwidth_hz: f64, limit_hz: f64 },

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("input has zero mean power")]
    ZeroPower,

    #[error("empty input")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    RateMismatch { left: f64, right: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("data matrix is rank deficient (column {column}, |r| = {magnitude:e}); set a ridge to regularize")]
    RankDeficient { column: usize, magnitude: f64 },

    #[error("adaptive estimator diverged at sample {sample}: coefficient norm {norm:e} exceeds {bound:e}")]
    Diverged {
        sample: usize,
        norm: f64,
        bound: f64,
    },

    #[error("invalid band edges [{lo}, {hi}]: {reason}")]
    InvalidBand { lo: f64, hi: f64, reason: String },

    #[error("streaming state does not match the term list: {0}")]
    TermMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown band {name:?}; available: {available}")]
    UnknownBand { name: String, available: String },

    #[error("config error: {0}")]
    Config(String),

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
