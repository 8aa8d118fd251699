//! Critical lengths `2π √((k² + kl + l²)/3)` and the distance `d(L)` of `L²`
//! to the nearest squared critical length.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::xreal::XReal;

/// Default tolerance on `d(L)` relative to `L²`.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub length: f64,
    pub is_critical: bool,
    /// Minimizing pair with `k <= l`; lexicographically smallest on ties.
    pub witness: Option<(u64, u64)>,
    pub d: XReal,
    pub tolerance: f64,
}

/// `(2π)² (k² + kl + l²) / 3`.
pub fn squared_critical(k: u64, l: u64) -> f64 {
    let (k, l) = (k as f64, l as f64);
    4.0 * PI * PI * (k * k + k * l + l * l) / 3.0
}

/// Critical length generated by the pair `(k, l)`.
pub fn critical_length(k: u64, l: u64) -> f64 {
    squared_critical(k, l).sqrt()
}

/// Default absolute tolerance for a length.
pub fn default_tolerance(length: f64) -> f64 {
    DEFAULT_REL_TOL * (length * length).max(1.0)
}

/// Finds `d(L) = min_{k,l >= 1} |L² - (2π)²(k²+kl+l²)/3|` by pruned enumeration.
pub fn classify(length: f64, tolerance: f64) -> CriticalReport {
    let l2 = length * length;
    let mut best = f64::INFINITY;
    let mut witness = None;
    let mut k = 1u64;
    // q(k, l) >= q(k, k) for l >= k, so rows with q(k, k) past the bound are done.
    while squared_critical(k, k) <= l2 + best {
        let mut l = k;
        loop {
            let q = squared_critical(k, l);
            let d = (l2 - q).abs();
            if d < best {
                best = d;
                witness = Some((k, l));
            }
            if q > l2 + best {
                break;
            }
            l += 1;
        }
        k += 1;
    }
    CriticalReport {
        length,
        is_critical: best <= tolerance,
        witness,
        d: XReal::from_f64(best),
        tolerance,
    }
}
