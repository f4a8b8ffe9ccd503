use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}, block {block}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        block: usize,
        expected: usize,
        found: usize,
    },

    #[error("block count mismatch in {context}: expected {expected}, found {found}")]
    BlockCountMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid gram weights: {0}")]
    InvalidWeights(String),

    #[error("not a frame over this space (smallest frame-operator eigenvalue {smallest_eigenvalue:e})")]
    NotAFrame { smallest_eigenvalue: f64 },

    #[error("stability construction failed: not a frame (smallest singular value {smallest_singular_value:e})")]
    StabilityConstructionFailed { smallest_singular_value: f64 },

    #[error("input vectors are not orthonormal: {0}")]
    NonOrthonormal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("aperture escapes torus: need half-width above {required}, got {half_width}")]
    ApertureEscapesTorus { required: f64, half_width: f64 },

    #[error("discrepancy principle undefined for noiseless data")]
    NoiselessDiscrepancy,

    #[error("decomposition has no dual frames for the codomain")]
    MissingDuals,

    #[error("Fourier multiplier overflow for order {order}")]
    MultiplierOverflow { order: f64 },

    #[error("invalid index partition: {0}")]
    InvalidPartition(String),

    #[error("dual frame cache: {0}")]
    Cache(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
