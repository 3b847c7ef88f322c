use std::fmt;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    /// The authentication itself was rejected.
    Rejected,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Rejected => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Rejected => f.write_str("authentication rejected"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<simpuf::error::Error> for CliError {
    fn from(e: simpuf::error::Error) -> Self {
        use simpuf::error::Error as E;
        match e {
            E::Io(_) | E::Parse { .. } | E::Incomplete { .. } | E::Duplicate { .. } | E::Store(_) => {
                CliError::Io(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
