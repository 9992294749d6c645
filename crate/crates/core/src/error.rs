use std::path::PathBuf;

use crate::model::EntityKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate gazetteer entry '{name}' ({part}) at line {line}")]
    DuplicateName {
        name: String,
        part: String,
        line: usize,
    },

    #[error("gazetteer has fewer than 2 candidates for {0}")]
    InsufficientGazetteer(String),

    #[error("{strategy}: input does not match the expected format ({reason})")]
    FormatMismatch {
        strategy: &'static str,
        reason: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no policy rule covers {kind} and the default action is reject")]
    PolicyGap { kind: String },

    #[error("{context}: {source}")]
    Located {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("external recognizer failed: {0}")]
    External(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn policy_gap(kind: &EntityKind) -> Self {
        Error::PolicyGap {
            kind: kind.to_string(),
        }
    }

    pub(crate) fn format(strategy: &'static str, reason: impl Into<String>) -> Self {
        Error::FormatMismatch {
            strategy,
            reason: reason.into(),
        }
    }

    /// Wraps the error with a location such as a byte range or a table cell.
    pub fn at(self, context: impl Into<String>) -> Self {
        Error::Located {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Category of the innermost error with no input-derived text, safe to
    /// show to callers who must not see cell values.
    pub fn redacted(&self) -> String {
        match self.root() {
            Error::Parse { .. } => "parse error".into(),
            Error::DuplicateName { .. } => "duplicate gazetteer entry".into(),
            Error::InsufficientGazetteer(_) => "gazetteer too small".into(),
            Error::FormatMismatch { strategy, .. } => format!("{strategy}: format mismatch"),
            Error::InvalidParams(_) => "invalid parameters".into(),
            Error::InvalidInput(_) => "invalid input".into(),
            Error::PolicyGap { kind } => format!("no policy rule covers {kind}"),
            Error::Io { .. } => "i/o error".into(),
            Error::Json(_) => "json error".into(),
            Error::External(_) => "external recognizer failed".into(),
            Error::Internal(_) | Error::Located { .. } => "internal error".into(),
        }
    }

    /// The innermost error, skipping location wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Located { source, .. } => source.root(),
            other => other,
        }
    }
}
