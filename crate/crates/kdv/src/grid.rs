use serde::{Deserialize, Serialize};

use crate::error::KdvError;

/// Smallest interior node count that fits the five-point stencil with room to spare.
pub const MIN_NODES: usize = 16;

/// Uniform grid with interior nodes `x_i = i h`, `i = 1..=N`, `h = L / (N + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub length: f64,
    pub nodes: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(length: f64, nodes: usize) -> Result<Self, KdvError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(KdvError::InvalidLength(length));
        }
        if nodes < MIN_NODES {
            return Err(KdvError::GridTooSmall { got: nodes, min: MIN_NODES });
        }
        Ok(Grid { length, nodes, h: length / (nodes + 1) as f64 })
    }

    /// Coordinate of interior node `i` (zero-based).
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    pub(crate) fn check(&self, u: &[f64]) -> Result<(), KdvError> {
        if u.len() == self.nodes {
            Ok(())
        } else {
            Err(KdvError::DimensionMismatch { expected: self.nodes, got: u.len() })
        }
    }
}
