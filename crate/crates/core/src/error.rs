use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate step: {0}")]
    DegenerateStep(String),

    #[error("rank collapse: k-th singular value {sigma:e} below threshold")]
    RankCollapse { sigma: f64 },

    #[error("{op} is not supported on {manifold}")]
    Unsupported { manifold: String, op: &'static str },

    #[error("missing derivative: problem supplies no {0}")]
    MissingDerivative(&'static str),

    #[error("{what} callable failed: {source}")]
    Callback {
        what: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn dim(expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
