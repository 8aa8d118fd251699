use obscost_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KdvError {
    #[error("grid needs at least {min} interior nodes, got {got}")]
    GridTooSmall { got: usize, min: usize },
    #[error("length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
    #[error("final time {t} is shorter than the step {dt}")]
    HorizonTooShort { t: f64, dt: f64 },
    #[error("state has {got} entries, grid has {expected} interior nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular pivot in column {column} (N = {nodes}, h = {h:e}, dt = {dt:e})")]
    SingularFactorization { column: usize, nodes: usize, h: f64, dt: f64 },
    #[error("discrete norms are available for orders 0..=3, got {0}")]
    OrderTooHigh(usize),
    #[error("time window [{lo}, {hi}] spans less than one decade")]
    WindowTooNarrow { lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed snapshot: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
}
