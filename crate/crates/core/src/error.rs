use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("factor sizes must be positive, got {rows}x{cols}")]
    EmptyFactor { rows: usize, cols: usize },

    #[error("{side} weights must be finite, nonnegative and sum to 1 (sum = {sum})")]
    BadWeights { side: &'static str, sum: f64 },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("function values must be finite")]
    NonFinite,

    #[error("cell ({row}, {col}) lies outside the {rows}x{cols} grid")]
    CellOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("not a partition of the grid: {0}")]
    NotAPartition(String),

    #[error("invalid exponent {0}; exponents must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("{0} requires finite exponents")]
    InfiniteExponent(&'static str),

    #[error("{0} supports scalar functions only")]
    VectorValued(&'static str),

    #[error("grid must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("size cap exceeded: {what} needs {size} cells, cap is {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("at least one restart is required")]
    ZeroRestarts,

    #[error("alpha = {alpha} must lie in the open interval ({lo}, {hi})")]
    AlphaOutOfRange { alpha: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl LabError {
    /// True for errors caused by an instance that is too large to process.
    pub fn is_size_cap(&self) -> bool {
        matches!(self, LabError::SizeCap { .. })
    }
}
