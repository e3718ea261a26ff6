use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line count mismatch: diff file has {diff_lines} lines, message file has {msg_lines}")]
    LineCountMismatch { diff_lines: usize, msg_lines: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("not a git repository: {0}")]
    NotARepository(PathBuf),

    #[error("git executable could not be invoked: {0}")]
    GitUnavailable(String),

    #[error("git command failed: {0}")]
    Git(String),

    #[error("vocabulary size {0} is too small (minimum 5)")]
    VocabTooSmall(usize),

    #[error("malformed embedding header: {0}")]
    MalformedHeader(String),

    #[error("embedding file truncated after {0} entries")]
    TruncatedFile(usize),

    #[error("embedding dimension is zero")]
    DimensionZero,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("index is empty")]
    EmptyIndex,

    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch { expected: String, found: String },

    #[error("class id {class} out of range for {class_count} classes")]
    InvalidClass { class: usize, class_count: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }

    /// Wraps the error with a human-readable context, typically a file name.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line tool:
    /// 1 usage/config error, 2 data error, 3 internal invariant failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Context { source, .. } => source.exit_code(),
            Error::InvalidConfig(_) | Error::GitUnavailable(_) | Error::BackendMismatch { .. } => 1,
            Error::InvalidClass { .. } => 3,
            _ => 2,
        }
    }
}
