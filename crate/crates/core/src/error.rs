use thiserror::Error;

use crate::network::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),

    #[error("bad unfolding: {0}")]
    BadUnfolding(String),

    #[error("oracle too large: dimension {dim} exceeds dense limit {limit}")]
    OracleTooLarge { dim: usize, limit: usize },

    #[error("unnormalized core: entry {value} outside [0, 1]")]
    UnnormalizedCore { value: f64 },

    /// A site tensor is identically zero, so the whole network is the zero
    /// operator and no block-encoding with a positive scale exists.
    #[error("zero operator{}", match .vertex { Some(v) => format!(" at vertex {v}"), None => String::new() })]
    ZeroOperator { vertex: Option<usize> },

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("empty operator: no nonzero terms")]
    EmptyOperator,

    #[error("bad processing order: {0}")]
    BadOrder(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
