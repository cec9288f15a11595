use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where a parse failed, and what would have been accepted there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source text.
    pub position: usize,
    pub expected: Vec<String>,
    pub found: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::Semantic => "semantic error",
        };
        write!(f, "{kind} at position {}: {}", self.position, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {}; found {})", self.expected.join(" | "), self.found)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("support of size {size} exceeds the limit of {cap}")]
    SizeLimit { size: usize, cap: usize },

    #[error("solver failure in {stage}: {diagnostics}")]
    Solver { stage: &'static str, diagnostics: String },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid vector literal: {0}")]
    VectorLiteral(String),

    #[error("at {path}: {source}")]
    AtNode { path: String, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Annotate with the space-expression node the error surfaced from.
    pub(crate) fn at(self, label: &str) -> Self {
        match self {
            Error::AtNode { path, source } => Error::AtNode {
                path: format!("{label} > {path}"),
                source,
            },
            other => Error::AtNode {
                path: label.to_string(),
                source: Box::new(other),
            },
        }
    }

    /// The underlying error with node annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. } => source.root(),
            other => other,
        }
    }
}
