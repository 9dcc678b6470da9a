use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Location of a syntax error inside a parsed input (resource file, CSV,
/// JSON or XML document). Lines and columns are 1-based; `offset` is a byte
/// offset when the parser reports one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub source_name: String,
    pub line: Option<u64>,
    pub column: Option<u64>,
    pub offset: Option<u64>,
    pub message: String,
}

impl ParseError {
    pub fn new(source_name: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            source_name: source_name.into(),
            line: None,
            column: None,
            offset: None,
            message: message.into(),
        }
    }

    pub fn at_line(mut self, line: u64, column: u64) -> Self {
        self.line = Some(line);
        self.column = Some(column);
        self
    }

    pub fn at_offset(mut self, offset: u64) -> Self {
        self.offset = Some(offset);
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source_name)?;
        if let (Some(line), Some(col)) = (self.line, self.column) {
            write!(f, ":{line}:{col}")?;
        }
        if let Some(offset) = self.offset {
            write!(f, " (byte {offset})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} not found: {id}")]
    NotFound { kind: &'static str, id: String },

    #[error("{kind} prefix `{prefix}` is ambiguous ({candidates} matches)")]
    Ambiguous {
        kind: &'static str,
        prefix: String,
        candidates: usize,
    },

    #[error("catalog at {path} is locked by {owner}")]
    LockHeld { path: PathBuf, owner: String },

    #[error("corrupt catalog: {0}")]
    CorruptCatalog(String),

    #[error("catalog is opened read-only")]
    ReadOnly,

    #[error("validation failed: {}", summarize_violations(.0))]
    ValidationFailed(Vec<Violation>),

    #[error("storage full")]
    StorageFull,

    #[error("missing required property `{0}`")]
    MissingProperty(String),

    #[error("node {node} is a {actual}, expected a {expected}")]
    KindMismatch {
        node: String,
        expected: &'static str,
        actual: &'static str,
    },

    #[error("objects {a} and {b} are not comparable with metric `{metric}`")]
    NotComparable { a: String, b: String, metric: String },

    #[error("unknown similarity metric `{0}`")]
    UnknownMetric(String),

    #[error("parenthood needs at least 2 distinct parents, got {0}")]
    TooFewParents(usize),

    #[error("parenthood link would create a cycle through {0}")]
    CycleDetected(String),

    #[error("tag set is empty after normalization")]
    EmptyTagSet,

    #[error("query contains no searchable terms")]
    EmptyQuery,

    #[error("unknown thesaurus `{0}`")]
    UnknownThesaurus(String),

    #[error("a resource named `{0}` already exists")]
    DuplicateName(String),

    #[error("parse error: {0}")]
    Parse(ParseError),

    #[error("cannot read {path}: {source}")]
    Unreadable { path: PathBuf, source: io::Error },

    #[error("{0} is not a text file")]
    NotText(PathBuf),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(#[source] io::Error),
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        // ENOSPC
        if err.kind() == io::ErrorKind::StorageFull || err.raw_os_error() == Some(28) {
            Error::StorageFull
        } else {
            Error::Io(err)
        }
    }
}

impl From<ParseError> for Error {
    fn from(err: ParseError) -> Self {
        Error::Parse(err)
    }
}

impl Error {
    pub(crate) fn not_found(kind: &'static str, id: impl fmt::Display) -> Self {
        Error::NotFound {
            kind,
            id: id.to_string(),
        }
    }

    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::CorruptCatalog(msg.into())
    }
}

fn summarize_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
