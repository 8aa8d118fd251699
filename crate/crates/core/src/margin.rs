//! Strict inequalities between extended-range values, judged against the
//! rounding uncertainty of their logarithms.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::mantissa::Mantissa;
use crate::xreal::XReal;

/// Relative mantissa error assumed for `f64` evaluations.
pub const EPS_F64: f64 = 1e-12;
/// Relative mantissa error assumed for 128-bit evaluations.
pub const EPS_HP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The margin is below the rounding uncertainty of the logarithms.
    Unresolved,
}

/// How far `lhs < rhs` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct Margin<M = f64> {
    /// `rhs - lhs`.
    pub slack: XReal<M>,
    /// `ln rhs - ln lhs`.
    pub log_margin: XReal<M>,
    /// Rounding uncertainty of `log_margin`.
    pub resolution: f64,
    pub status: Status,
}

impl<M: Mantissa> Margin<M> {
    /// Both sides must be positive.
    pub fn new(lhs: &XReal<M>, rhs: &XReal<M>, eps: f64) -> Result<Self, CoreError> {
        let slack = rhs - lhs;
        let log_margin = rhs.ln()? - lhs.ln()?;
        let resolution = lhs.log_uncertainty(eps) + rhs.log_uncertainty(eps);
        let m = log_margin.to_f64();
        let status = if m > resolution {
            Status::Pass
        } else if m < -resolution || (m == 0.0 && resolution == 0.0) {
            Status::Fail
        } else {
            Status::Unresolved
        };
        Ok(Margin { slack, log_margin, resolution, status })
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Pass
    }
}
