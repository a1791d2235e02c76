use thiserror::Error;

/// Errors produced by the embedding library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension {0} is not a power of four")]
    NotPowerOfFour(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index set must be strictly increasing and non-empty")]
    InvalidIndexSet,
    #[error("field degree {0} outside [1, 32]")]
    DegreeOutOfRange(u32),
    #[error("field element {value:#x} out of range for degree {degree}")]
    ElementOutOfRange { value: u64, degree: u32 },
    #[error("row count {k} out of range (1..={max})")]
    RowsOutOfRange { k: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exponent p = {0} outside [1, 2]")]
    ExponentOutOfRange(f64),
    #[error("strict mode requires k <= d_pad^(1/4) = {limit}, got k = {k}")]
    StrictDimension { k: usize, limit: usize },
    #[error("work budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("input must be a unit vector (norm {0})")]
    NonUnit(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("distortion {eps} exceeds 1/sqrt(128); subset size would be zero")]
    EpsTooLarge { eps: f64 },
    #[error("separation intervals overlap: inner upper {inner_hi} >= outer lower {outer_lo}")]
    IntervalsOverlap { inner_hi: f64, outer_lo: f64 },
    #[error("distance {distance} for pair ({set}, {index}) lies inside the forbidden gap")]
    GapViolation { set: usize, index: usize, distance: f64 },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed or unreadable files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Format(_) | Error::Io(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
