use crate::expr::{EvalError, ExprError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("singular metric: pivot magnitude {pivot:e} below 1e-14")]
    SingularMetric { pivot: f64 },
    /// Indices are 1-based, as shown to users.
    #[error("metric `{metric}` is not symmetric: entries ({row},{col}) and ({col},{row}) differ")]
    AsymmetricMetric {
        metric: String,
        row: usize,
        col: usize,
    },
    #[error("metric `{metric}` is not positive definite at {point:?}")]
    NotPositiveDefinite { metric: String, point: Vec<f64> },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("invalid order {0}: must be at least 1")]
    InvalidOrder(usize),
    #[error("base metric must be constant, entry ({row},{col}) is not")]
    NonConstantBase { row: usize, col: usize },
    #[error("`{0}` is not skew-symmetric")]
    NonSkew(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
