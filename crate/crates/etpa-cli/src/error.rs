use std::path::PathBuf;

use etpa::EtpaError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: EtpaError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cross-check failed: max relative error {error:.3e} exceeds {bound:.3e}")]
    Bound { error: f64, bound: f64 },
}

impl CliError {
    /// 2 for bad input, 3 for numerical failures, 4 for a violated cross-check bound.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine { source, .. } => match source {
                EtpaError::Config(_) | EtpaError::Domain(_) | EtpaError::Coverage(_) => 2,
                _ => 3,
            },
            CliError::Io { .. } | CliError::Csv(_) => 3,
            CliError::Bound { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Attaches a description of the failing step to an engine error.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, EtpaError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| CliError::Engine { context: what(), source })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
