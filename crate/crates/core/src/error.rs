use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input violates a domain constraint.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A non-finite value was handed to a numerical routine.
    #[error("non-finite value in `{field}`")]
    NonFinite { field: &'static str },

    /// The closed loop produced a non-finite state.
    #[error("simulation diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    /// Configuration text could not be parsed.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. }
            | Error::NonFinite { .. }
            | Error::Unsupported(_)
            | Error::Parse { .. } => 1,
            Error::Diverged { .. } => 2,
            Error::Io { .. } => 3,
        }
    }
}
