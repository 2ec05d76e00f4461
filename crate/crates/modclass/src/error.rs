use std::path::PathBuf;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("no data: {0}")]
    EmptyData(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::EmptyData(_) | HarnessError::Io { .. } => 1,
        }
    }

    /// Prefixes the message with where the failure happened.
    pub fn with_context(self, context: impl std::fmt::Display) -> Self {
        match self {
            HarnessError::Config(m) => HarnessError::Config(format!("{context}: {m}")),
            HarnessError::Numerical(m) => HarnessError::Numerical(format!("{context}: {m}")),
            HarnessError::EmptyData(m) => HarnessError::EmptyData(format!("{context}: {m}")),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<modclass_core::Error> for HarnessError {
    fn from(e: modclass_core::Error) -> Self {
        match e {
            modclass_core::Error::Numerical(_) => HarnessError::Numerical(e.to_string()),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
