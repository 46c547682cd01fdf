use thiserror::Error;

/// Errors produced by the model, the solvers and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration value violates one of its invariants.
    #[error("invalid config key `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("reducible chain: {0}")]
    ReducibleChain(String),

    #[error("simulation: {0}")]
    Simulation(String),

    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key,
            reason: reason.into(),
        }
    }
}
