use std::fmt;

use mowave_core::Error as CoreError;

/// Process exit codes. No other codes are ever emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    /// Config does not parse or the problem fails its assumption checks.
    Invalid = 2,
    BlowUp = 3,
    BoundViolated = 4,
    EmptyWindow = 5,
    OrderTooLow = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

impl fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_status(&self) -> ExitStatus {
        match self {
            HarnessError::Core(CoreError::BlowUp { .. }) => ExitStatus::BlowUp,
            _ => ExitStatus::Invalid,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
