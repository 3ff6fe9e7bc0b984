//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A data file failed to parse; points at the offending line.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Structurally invalid input (bad counts, self-pairs, unknown labels).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Parameters and data disagree with the requested model.
    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    /// An exact enumeration was requested on an instance too large for it.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an I/O error with the path it concerns.
    pub fn io_at(path: impl AsRef<std::path::Path>, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.as_ref().display()),
        ))
    }

    /// Short machine-readable category, used as the CLI diagnostic prefix.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidInput(_) => "input",
            Error::ModelMismatch(_) => "model",
            Error::TooLarge(_) => "size",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Process exit code for the CLI: data problems map to 65 (EX_DATAERR),
    /// I/O problems to 74 (EX_IOERR).
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) => 74,
            _ => 65,
        }
    }
}
