use std::path::PathBuf;

/// Errors produced by the samplers, solvers, and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A distribution or solver parameter lies outside its domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Cholesky factorization failed even after the diagonal jitter
    /// escalation; carries the jitter magnitudes that were attempted.
    #[error("precision matrix is not positive definite (jitters tried: {attempted:?})")]
    Conditioning { attempted: Vec<f64> },

    /// An iterative solver hit its iteration cap before meeting tolerance.
    #[error("solver did not converge within {iterations} iterations (objective {objective:.6e})")]
    Convergence { iterations: usize, objective: f64 },

    /// The design matrix has (numerically) deficient column rank.
    #[error("design matrix is rank deficient")]
    SingularDesign,

    /// A configuration value is inconsistent or out of range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A Gibbs sweep failed; records which iteration broke.
    #[error("gibbs chain failed at iteration {iteration}: {source}")]
    Chain {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// A checkpoint file could not be understood.
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A data file had the right bytes but the wrong content.
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
