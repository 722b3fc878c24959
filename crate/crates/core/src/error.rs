use thiserror::Error;

pub type Result<T, E = SenseError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SenseError {
    #[error("frame must contain at least one sample")]
    EmptyFrame,

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("{what} must be {expected}, got {value}")]
    InvalidParameter {
        what: &'static str,
        expected: &'static str,
        value: f64,
    },

    #[error("probability must lie strictly inside (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("frame has zero energy; normalized autocorrelation is undefined")]
    ZeroEnergy,

    #[error("lag {max_lag} requires more than {len} samples")]
    LagOutOfRange { max_lag: usize, len: usize },

    #[error("fusion needs at least one report")]
    NoReports,

    #[error("fusion reports must all be hard or all be soft")]
    MixedReports,

    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SenseError {
    pub(crate) fn param(what: &'static str, expected: &'static str, value: f64) -> Self {
        SenseError::InvalidParameter {
            what,
            expected,
            value,
        }
    }
}
