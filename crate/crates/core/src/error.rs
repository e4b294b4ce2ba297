use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A simulation region is larger than the backend can hold.
    #[error("capacity exceeded: {what} needs {requested} qubits, backend limit is {limit}")]
    Capacity {
        what: String,
        requested: usize,
        limit: usize,
    },

    #[error("conditioning on a zero-probability event: {0}")]
    ZeroProbability(String),

    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("numerical failure at site {site}: {reason}")]
    Numerical { site: usize, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Sizing and capacity errors map to a distinct CLI exit status.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
