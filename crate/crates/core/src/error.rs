use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A packet log violates the structural rules of a trace.
    #[error("malformed packet log: {0}")]
    Structural(String),

    /// FCFS with an unbounded queue needs `lambda < mu`.
    #[error("unstable configuration: lambda = {lambda} >= mu = {mu} for an unbounded FCFS queue")]
    Unstable { lambda: f64, mu: f64 },

    /// The (discipline, service, metric, order) combination has no closed form in the catalog.
    #[error("not in paper: {0}")]
    Uncataloged(String),

    /// A required externally supplied input was not given.
    #[error("missing input: {0}")]
    MissingInput(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Simulation time arithmetic left the finite range.
    #[error("horizon overflow: {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by an invalid query rather than a runtime failure.
    pub fn is_invalid_query(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Unstable { .. }
                | Error::Uncataloged(_)
                | Error::MissingInput(_)
                | Error::Parse(_)
                | Error::Structural(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
