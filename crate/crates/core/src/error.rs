use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frame degenerated: smallest singular value {min_singular:e} below 1e-8")]
    SingularFrame { min_singular: f64 },

    #[error("grid mismatch: expected dims {expected:?}, found {found:?}")]
    GridMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },

    #[error("non-finite value in {0}")]
    NonFiniteField(&'static str),

    #[error("step {step} at t = {t}: {quantity} grew by factor {growth:e} in one step")]
    StepUnstable {
        step: u64,
        t: f64,
        quantity: &'static str,
        growth: f64,
    },

    #[error("diagnostic order s = {s} exceeds the float64 limit {max}")]
    SLimitExceeded { s: u32, max: u32 },

    #[error("bad initial-data spec: {0}")]
    BadSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("snapshot checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("ledger error: {0}")]
    Ledger(String),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
