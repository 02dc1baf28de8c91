use thiserror::Error;

pub type Result<T, E = TtError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TtError {
    #[error("index {index:?} out of bounds for shape {shape:?}")]
    IndexOutOfBounds { index: Vec<usize>, shape: Vec<usize> },

    #[error("flat index {index} out of range for {len} elements")]
    FlatIndexOutOfRange { index: usize, len: usize },

    #[error("mode {mode} is invalid for a tensor of order {order}")]
    InvalidMode { mode: usize, order: usize },

    #[error("invalid mode partition: {0}")]
    InvalidPartition(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("block grid mismatch: {0}")]
    BlockGridMismatch(String),

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("materialized size {size} exceeds the cap {cap}")]
    SizeGuard { size: usize, cap: usize },

    #[error("local problem of size {size} at site {site} exceeds the cap {cap}")]
    LocalSizeCap { site: usize, size: usize, cap: usize },

    #[error("environments are stale at site {site}")]
    StaleEnvironment { site: usize },

    #[error("block column {index} out of range for {count} columns")]
    BlockIndex { index: usize, count: usize },

    #[error("requested {requested} vectors but the local space at site {site} has dimension {available}")]
    TooManyVectors { requested: usize, available: usize, site: usize },

    #[error("size {size} cannot be factored over base {base}")]
    NotFactorizable { size: usize, base: usize },

    #[error("local Gram matrix at site {site} is not positive definite after {attempts} regularization attempts (min diagonal {min_diag:e}, trace {trace:e})")]
    IndefiniteGram { site: usize, attempts: usize, min_diag: f64, trace: f64 },

    #[error("dense factorization failed: {0}")]
    Factorization(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
