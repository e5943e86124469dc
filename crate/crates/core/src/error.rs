use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Each variant carries the module-level message the CLI prints verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("(H) violated: convex hull of disks {i} and {j} meets disk {l}")]
    Eclipse { i: usize, j: usize, l: usize },

    #[error("solver failed on {word}: {reason}")]
    Solver { word: String, reason: String },

    #[error("admissibility check failed on {word}: {reason}")]
    Admissibility { word: String, reason: String },

    #[error("linearization error: {0}")]
    Linearization(String),

    #[error("incomplete spectrum: {0}")]
    IncompleteSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("spectrum file error: {0}")]
    Store(String),

    #[error("spectrum file parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
