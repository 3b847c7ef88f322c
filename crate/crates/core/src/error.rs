use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("missing measurement for condition `{condition}`, ro {ro}, repeat {repeat}")]
    Incomplete {
        condition: String,
        ro: usize,
        repeat: usize,
    },

    #[error("duplicate measurement for condition `{condition}`, ro {ro}, repeat {repeat}")]
    Duplicate {
        condition: String,
        ro: usize,
        repeat: usize,
    },

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("sampled frequency {freq} MHz is not positive; increase f0")]
    NonPositiveFrequency { freq: f64 },

    #[error("unknown operating condition `{0}`")]
    UnknownCondition(String),

    #[error("degenerate statistics: {0}")]
    Degenerate(String),

    #[error("challenge out of range: {0}")]
    ChallengeRange(String),

    #[error("model kind mismatch: {0}")]
    KindMismatch(String),

    #[error("model fit did not converge after {epochs} epochs (training accuracy {accuracy:.4})")]
    FitDiverged { epochs: usize, accuracy: f64 },

    #[error("unknown hash id {0}")]
    UnknownHash(u8),

    #[error("store format: {0}")]
    Store(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("protocol: {0}")]
    Protocol(String),

    #[error("transport: {0}")]
    Transport(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
