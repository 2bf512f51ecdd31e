use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParam { name: String, constraint: String },

    #[error("event at {timestamp_ms} ms is newer than the analysis instant {as_of_ms} ms")]
    ClockSkew { timestamp_ms: i64, as_of_ms: i64 },

    #[error("negative age {0} days: event lies after the analysis instant")]
    NegativeAge(f64),

    #[error("event log line {line}: field `{field}`: {message}")]
    EventLog {
        line: usize,
        field: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("no git repository at {path}: {message}")]
    RepositoryNotFound { path: PathBuf, message: String },

    #[error("branch `{0}` not found in repository")]
    BranchNotFound(String),

    #[error("repository error at commit {commit}: {source}")]
    Corrupt {
        commit: String,
        #[source]
        source: git2::Error,
    },

    #[error(transparent)]
    Git(#[from] git2::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    InputData,
    Repository,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParam { .. } => ErrorCategory::Usage,
            Error::ClockSkew { .. }
            | Error::NegativeAge(_)
            | Error::EventLog { .. }
            | Error::Input { .. }
            | Error::Evaluation(_)
            | Error::Io(_) => ErrorCategory::InputData,
            Error::RepositoryNotFound { .. }
            | Error::BranchNotFound(_)
            | Error::Corrupt { .. }
            | Error::Git(_) => ErrorCategory::Repository,
        }
    }

    pub(crate) fn input(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Input {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
