use thiserror::Error;

/// Errors raised by algebra construction, operator validation and the
/// averaging procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid block dimensions: {0}")]
    InvalidDims(String),

    #[error("shape mismatch: expected blocks {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("block index {index} out of range for {blocks} blocks")]
    InvalidBlock { index: usize, blocks: usize },

    #[error("quotient must keep at least one block")]
    EmptyQuotient,

    #[error("element is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("element is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid convex weights: {0}")]
    InvalidWeights(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("projections are not a central partition of unity: {0}")]
    NotCentralPartition(String),

    #[error("tuple is empty")]
    EmptyTuple,

    #[error("subspace basis is linearly dependent (smallest singular value {0:.3e})")]
    DependentBasis(f64),

    #[error("trace obstruction: basis element {item} has block-{block} trace {trace:.6e}")]
    TraceObstruction {
        item: usize,
        block: usize,
        trace: f64,
    },

    #[error("ideal obstruction: no state on block {block} annihilates the subspace (optimum {optimum:.6e})")]
    IdealObstruction { block: usize, optimum: f64 },

    #[error("averaging residual {residual:.3e} does not meet tolerance {eps:.3e}")]
    ResidualTooLarge { residual: f64, eps: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
