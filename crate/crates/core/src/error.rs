use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },
    #[error("invalid penalty threshold {0}")]
    InvalidThreshold(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("requested {requested} centers but only {available} points are available")]
    TooFewPoints { requested: usize, available: usize },
    #[error("total penalized cost is zero after {centers} centers")]
    TotalCostZero { centers: usize },
    #[error("no rung of the threshold ladder produced a feasible solution")]
    InfeasibleRung,
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
}
