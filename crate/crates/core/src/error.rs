use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("unknown column in metadata: {0}")]
    UnknownMetadataColumn(String),

    #[error("unknown column: {0}")]
    UnknownColumn(String),

    #[error("too few complete rows: {have} available, {need} required")]
    TooFewRows { have: usize, need: usize },

    #[error("dependent column {0} cannot be encoded as a numeric outcome")]
    DependentNotEncodable(String),

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("unresolved placeholders in template: {}", .0.join(", "))]
    UnresolvedPlaceholders(Vec<String>),

    #[error("workspace already exists for run {0}")]
    WorkspaceCollision(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::InvalidArgument(_)
            | Error::UnresolvedPlaceholders(_)
            | Error::UnknownColumn(_)
            | Error::UnknownMetadataColumn(_) => 2,
            Error::InsufficientData(_) | Error::TooFewRows { .. } | Error::InvalidSample(_) => 3,
            _ => 4,
        }
    }
}
