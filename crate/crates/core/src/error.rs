use serde::Serialize;
use thiserror::Error;

use crate::item::{ItemPool, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure category reported by a chat or embedding backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendErrorKind {
    /// Bad credentials or an unusable provider configuration.
    Config,
    /// Rate limited and out of retries.
    RateLimit,
    /// Provider answered with something we could not interpret.
    Protocol,
    /// Transport-level failure.
    Transport,
    /// A request was attempted while the process runs offline.
    Offline,
    /// Caller supplied unusable input (e.g. empty text).
    Input,
}

/// Error surfaced through the [`crate::backend`] traits.
#[derive(Debug, Clone, Error)]
#[error("{kind:?}: {message}")]
pub struct BackendError {
    pub kind: BackendErrorKind,
    pub message: String,
}

impl BackendError {
    pub fn new(kind: BackendErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

/// Per-type generation shortfall: `(item_type, generated, target)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Shortfall {
    pub item_type: String,
    pub generated: usize,
    pub target: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invalid item pool: {0}")]
    InvalidPool(ValidationReport),

    #[error("degenerate input: item `{item}` has zero variance across embedding dimensions")]
    ZeroVariance { item: String },

    #[error("size error: {0}")]
    Size(String),

    #[error("graphical lasso did not converge at lambda index {lambda_index}")]
    NonConvergence { lambda_index: usize },

    #[error("parse error: no parsable `attribute | statement` lines ({skipped} skipped)")]
    Parse { skipped: usize },

    /// Some item types fell short of their target; `partial` holds
    /// everything that was generated.
    #[error("generation budget exhausted: {}", format_shortfall(.shortfalls))]
    Generation {
        shortfalls: Vec<Shortfall>,
        partial: Box<ItemPool>,
    },

    #[error("backend error: {0}")]
    Backend(#[from] BackendError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_shortfall(s: &[Shortfall]) -> String {
    s.iter()
        .map(|s| format!("{} {}/{}", s.item_type, s.generated, s.target))
        .collect::<Vec<_>>()
        .join(", ")
}
