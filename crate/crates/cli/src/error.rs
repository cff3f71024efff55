use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CAPACITY: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; `location` is e.g. `exp.json:12`.
    #[error("{location}: {message}")]
    Config { location: String, message: String },

    #[error("cannot read {}: {source}", path.display())]
    MissingInput {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Analysis {
        context: String,
        #[source]
        source: jumpmix::Error,
    },

    /// A report was produced but records a violated assumption.
    #[error("{0}")]
    AssumptionFailed(String),
}

impl CliError {
    pub fn config(location: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use jumpmix::Error as E;
        match self {
            CliError::Config { .. } | CliError::MissingInput { .. } => exit::CONFIG,
            CliError::Write { .. } => exit::IO,
            CliError::AssumptionFailed(_) => exit::INVARIANT,
            CliError::Analysis { source, .. } => match source {
                E::Capacity { .. } => exit::CAPACITY,
                E::Invariant(_) | E::Contract(_) => exit::INVARIANT,
                E::Io(_) => exit::IO,
                _ => exit::CONFIG,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a context label to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for jumpmix::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Analysis {
            context: what.to_string(),
            source,
        })
    }
}
