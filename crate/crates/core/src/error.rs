use std::path::PathBuf;

use faer::c64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar frequency function has a pole at the requested point.
    #[error("scalar function {function} is undefined at s = {s}")]
    SingularFunction { function: String, s: c64 },

    /// Factorization of K(s) (or any other square system) broke down.
    #[error("matrix is numerically singular{}", at_point(.s))]
    SingularK { s: Option<c64> },

    #[error("projected pencil is singular at training point {index} (s = {s})")]
    SingularProjectedPencil { index: usize, s: c64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: String,
        expected: String,
        got: String,
    },

    #[error("SVD did not converge")]
    ConvergenceFailure,

    #[error("no unselected training points remain")]
    Exhausted,

    #[error("unsupported size {n} for {kind}")]
    UnsupportedSize { kind: &'static str, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

fn at_point(s: &Option<c64>) -> String {
    match s {
        Some(s) => format!(" at s = {s}"),
        None => String::new(),
    }
}

impl Error {
    pub fn dims(context: impl Into<String>, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of what was being done.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub trait ResultExt<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(context()))
    }
}
