//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {0} is outside the unit interval [0, 1]")]
    OutsideUnitInterval(String),

    #[error("dyadic {point} is not representable at level {level}")]
    LevelTooSmall { point: String, level: u32 },

    #[error("cannot parse {input:?} as {expected}")]
    Parse { input: String, expected: &'static str },

    #[error("mantissa of {0} does not fit the supported index range")]
    MantissaTooLarge(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exact cell cost is only defined for xor plans")]
    ExactCellUnsupported,

    #[error("grid is not reflection-symmetric on axis {axis}: {detail}")]
    AsymmetricGrid { axis: char, detail: String },

    #[error("degenerate four-point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("pivot limit exceeded after {0} pivots")]
    PivotLimit(u64),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("level {level} exceeds the configured budget ({budget})")]
    BudgetExceeded { level: u32, budget: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
