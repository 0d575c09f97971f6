use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum FelError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("level {requested} exceeds measure resolution {resolution}")]
    InsufficientResolution { requested: i64, resolution: i64 },

    #[error("composition budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },

    #[error("epsilon cascade degenerate (eps_d = {eps_d:.3e} too large)")]
    CascadeDegenerate { eps_d: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FelError>;
