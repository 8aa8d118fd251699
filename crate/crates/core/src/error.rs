use thiserror::Error;

use crate::xreal::XRealError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("Sobolev index out of range: need 0 < n < m <= 7, got n = {n}, m = {m}")]
    IndexOutOfRange { n: usize, m: usize },
    #[error("order {0} outside the supported range 0..=7")]
    OrderOutOfRange(usize),
    #[error("unknown lambda profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid lambda profile: {0}")]
    InvalidProfile(String),
    #[error("length L = {0} is below the standing assumption L >= 4")]
    LengthTooSmall(f64),
    #[error("critical length: L = {length} is within {distance:e} of the critical value for {witness:?}")]
    CriticalLength { length: f64, witness: Option<(u64, u64)>, distance: f64 },
    #[error("radius K = {k} is below the threshold K0 = {k0}")]
    RadiusBelowThreshold { k: String, k0: String },
    #[error("{name} must be at least {min}, got {value}")]
    BelowMinimum { name: &'static str, value: String, min: String },
    #[error("{0} must be strictly positive")]
    NonPositive(&'static str),
    #[error("delta = {delta} outside (0, {upper})")]
    DeltaOutOfRange { delta: String, upper: String },
    #[error("validity condition violated by margin {margin:e}")]
    ConditionViolated { margin: f64 },
    #[error("computation cancelled")]
    Cancelled,
    #[error(transparent)]
    Arithmetic(#[from] XRealError),
}

impl CoreError {
    /// Errors caused by inputs outside the mathematical domain, as opposed to
    /// internal failures.
    pub fn is_domain(&self) -> bool {
        !matches!(self, CoreError::Arithmetic(_) | CoreError::Cancelled)
    }
}
