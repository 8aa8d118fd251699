//! Membership test for the near-eigenfunction set `B_γ`.

use num_complex::Complex64;
use obscost_core::XReal;
use obscost_kdv::{discrete_norm, DiscreteOperator};
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::linalg::c_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BGammaDiagnostics {
    pub gamma: f64,
    pub lambda: crate::linalg::Eig,
    pub norm: f64,
    pub h3_norm: f64,
    pub k1: XReal,
    /// `g(0)` and `g(L)`; zero by construction of the grid.
    pub boundary_values: (f64, f64),
    /// One-sided `|g_x(L)|`.
    pub right_slope: f64,
    /// `|g_x(0)|`.
    pub flux: f64,
    /// `‖λ g - A_h g‖_h`.
    pub residual: f64,
    pub normalized: bool,
    pub h3_within_k1: bool,
    pub flux_below_gamma: bool,
    pub residual_below_gamma: bool,
}

impl BGammaDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.normalized && self.h3_within_k1 && self.flux_below_gamma && self.residual_below_gamma
    }
}

/// Normalization tolerance on `‖g‖_h`.
const NORM_TOL: f64 = 1e-8;

pub fn b_gamma_check(
    op: &DiscreteOperator,
    g: &[Complex64],
    lambda: Complex64,
    k1: &XReal,
    gamma: f64,
) -> Result<BGammaDiagnostics, LabError> {
    let grid = op.grid;
    if g.len() != grid.nodes {
        return Err(LabError::DimensionMismatch { expected: grid.nodes, got: g.len() });
    }
    let re: Vec<f64> = g.iter().map(|z| z.re).collect();
    let im: Vec<f64> = g.iter().map(|z| z.im).collect();
    let norm = c_norm(&grid, g);
    let h3_norm = (discrete_norm(&re, 3, &grid)?.powi(2) + discrete_norm(&im, 3, &grid)?.powi(2)).sqrt();
    let flux = Complex64::new(op.flux(&re), op.flux(&im)).norm();
    let n = grid.nodes;
    let slope = |v: &[f64]| (4.0 * v[n - 1] - v[n - 2]) / (2.0 * grid.h);
    let right_slope = Complex64::new(slope(&re), slope(&im)).norm();
    let (are, aim) = (op.apply(&re)?, op.apply(&im)?);
    let r: Vec<Complex64> = g
        .iter()
        .zip(are.iter().zip(&aim))
        .map(|(z, (x, y))| lambda * z - Complex64::new(*x, *y))
        .collect();
    let residual = c_norm(&grid, &r);
    Ok(BGammaDiagnostics {
        gamma,
        lambda: lambda.into(),
        norm,
        h3_norm,
        k1: k1.clone(),
        boundary_values: (0.0, 0.0),
        right_slope,
        flux,
        residual,
        normalized: (norm - 1.0).abs() <= NORM_TOL,
        h3_within_k1: XReal::from_f64(h3_norm) <= *k1,
        flux_below_gamma: flux < gamma,
        residual_below_gamma: residual < gamma,
    })
}
