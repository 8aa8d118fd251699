use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::KdvError;
use crate::grid::Grid;
use crate::norms::dot;

/// How the boundary conditions enter the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClosure {
    /// `u_0 = u_{N+1} = 0`, left ghost `u_{-1} = -3u_1 + u_2` (quadratic extrapolation),
    /// right ghost `u_{N+2} = u_N` from the centered `u_x(L) = 0`, plus a rank-one
    /// correction on the first two rows that makes the discrete energy law exact:
    /// `⟨A v, v⟩_h = -φ(v)²/2 - (v_N / h)²/2`.
    GhostEnergyExact,
    /// The zero operator, for degenerate tests.
    Zero,
}

/// Discretization `A_h` of `A u = -u_x - u_xxx` on the interior nodes.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: Grid,
    pub closure: BoundaryClosure,
    matrix: BandMatrix,
}

/// Bandwidth of the operator on either side of the diagonal.
const BAND: usize = 2;

/// Builds `A_h` with second-order centered stencils for `u_x` and `u_xxx`.
pub fn build_operator(grid: Grid) -> Result<DiscreteOperator, KdvError> {
    let n = grid.nodes;
    if n < crate::grid::MIN_NODES {
        return Err(KdvError::GridTooSmall { got: n, min: crate::grid::MIN_NODES });
    }
    let h = grid.h;
    let h3 = h * h * h;
    let mut a = BandMatrix::zeros(n, BAND, BAND);
    // Node p in 1..=N sits in row p - 1. Offsets -2..=2 with their coefficients.
    let stencil = [
        (-2i64, 1.0 / (2.0 * h3)),
        (-1, 1.0 / (2.0 * h) - 1.0 / h3),
        (1, -1.0 / (2.0 * h) + 1.0 / h3),
        (2, -1.0 / (2.0 * h3)),
    ];
    let np = n as i64;
    for p in 1..=np {
        let row = (p - 1) as usize;
        for &(off, c) in &stencil {
            let q = p + off;
            match q {
                0 => {}
                -1 => {
                    a.add(row, 0, -3.0 * c);
                    a.add(row, 1, c);
                }
                q if q == np + 1 => {}
                q if q == np + 2 => a.add(row, n - 1, c),
                q => a.add(row, (q - 1) as usize, c),
            }
        }
    }
    // A -= m mᵀ / (2h), m = (1, -1/2, 0, ...) / h.
    let m = [1.0 / h, -0.5 / h];
    for i in 0..2 {
        for j in 0..2 {
            a.add(i, j, -m[i] * m[j] / (2.0 * h));
        }
    }
    Ok(DiscreteOperator { grid, closure: BoundaryClosure::GhostEnergyExact, matrix: a })
}

impl DiscreteOperator {
    pub fn zero(grid: Grid) -> Self {
        DiscreteOperator { grid, closure: BoundaryClosure::Zero, matrix: BandMatrix::zeros(grid.nodes, BAND, BAND) }
    }

    pub fn nodes(&self) -> usize {
        self.grid.nodes
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>, KdvError> {
        self.grid.check(u)?;
        let mut out = vec![0.0; u.len()];
        self.matrix.mul_vec(u, &mut out);
        Ok(out)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.matrix.mul_vec(u, out);
    }

    /// Second-order one-sided `u_x(0) ≈ (2 u_1 - u_2 / 2) / h`, using `u(0) = 0`.
    pub fn flux(&self, u: &[f64]) -> f64 {
        flux(&self.grid, u)
    }

    /// `⟨A_h u, u⟩_h`.
    pub fn quad_form(&self, u: &[f64]) -> Result<f64, KdvError> {
        let au = self.apply(u)?;
        Ok(dot(&self.grid, &au, u))
    }

    /// The dissipation predicted by the closure, `-φ²/2 - (u_N/h)²/2`.
    pub fn energy_rate(&self, u: &[f64]) -> f64 {
        match self.closure {
            BoundaryClosure::Zero => 0.0,
            BoundaryClosure::GhostEnergyExact => {
                let f = self.flux(u);
                let r = u[u.len() - 1] / self.grid.h;
                -0.5 * f * f - 0.5 * r * r
            }
        }
    }

    /// Transpose with respect to the plain Euclidean product. Since the discrete
    /// inner product is `h` times it, this is also the `h`-adjoint.
    pub fn transpose(&self) -> Self {
        DiscreteOperator { grid: self.grid, closure: self.closure, matrix: self.matrix.transpose() }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.matrix.to_dense()
    }
}

pub(crate) fn flux(grid: &Grid, u: &[f64]) -> f64 {
    (2.0 * u[0] - 0.5 * u[1]) / grid.h
}
