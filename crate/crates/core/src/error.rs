use thiserror::Error;

/// Errors raised by models, estimators and the run front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or design lies outside the model's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed input to a numerical routine.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),
    /// The model lacks something the estimator needs (e.g. a likelihood).
    #[error("capability error: {0}")]
    Capability(String),
    /// Cluster-size constraints cannot be met.
    #[error(
        "infeasible constraint: {n} points cannot form {clusters} clusters of at least {n_min}"
    )]
    Infeasible {
        n: usize,
        clusters: usize,
        n_min: usize,
    },
    /// A utility or statistic came out NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
