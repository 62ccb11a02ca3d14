use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("infeasible Whitney constant: {0}")]
    InfeasibleConstant(String),

    #[error("no chain between cubes {from} and {to}")]
    NoChain { from: usize, to: usize },

    #[error("unsupported order: {0}")]
    Capability(String),

    #[error("incomplete derivative table: missing {0}")]
    IncompleteInput(String),

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("coverage: {0}")]
    Coverage(String),

    #[error("ill-conditioned system on cube {cube}: {detail}")]
    Conditioning { cube: String, detail: String },

    #[error("invalid parameters: {0}")]
    Spec(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
