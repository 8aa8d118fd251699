//! Observability Gramian `G_ij = Σ_k w_k φ_i(t_k) φ_j(t_k)` in an `h`-orthonormal basis.
//!
//! Flux traces are obtained from one adjoint propagation: the flux functional
//! `r_0 = (2, -1/2, 0, ...)/h` is advanced by the stepper of `A_hᵀ`, which equals
//! `r_k P` for the forward step `P` because both θ-factors are functions of `A_h`.
//! Then `φ_i(t_k) = r_k · s_i` for every basis state `s_i` at once.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use obscost_kdv::{trapezoid_weights, DiscreteOperator, Grid, Scheme, Stepper};
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::linalg::orthonormalize;
use crate::subspace::SubspaceM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Discrete sine modes `n <= N/2` with `(k³ + k) dt <= 2`, `k = nπ/L`.
    FilteredSine,
    /// All `N` scaled coordinate vectors `e_i / √h`.
    Nodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramianOptions {
    pub basis: Basis,
    pub scheme: Scheme,
    /// Upper bound on `N * steps`.
    pub budget: u64,
}

impl Default for GramianOptions {
    fn default() -> Self {
        GramianOptions { basis: Basis::FilteredSine, scheme: Scheme::Trapezoidal, budget: 2_000_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Gramian {
    pub grid: Grid,
    pub time: f64,
    pub dt: f64,
    pub steps: usize,
    pub options: GramianOptions,
    /// Basis states as columns (`N × m`), `h`-orthonormal.
    pub basis: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvector: DVector<f64>,
    /// Largest `|G_ij - G_ji|` before symmetrization.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramianSummary {
    pub length: f64,
    pub nodes: usize,
    pub time: f64,
    pub dt: f64,
    pub basis: Basis,
    pub scheme: Scheme,
    pub dimension: usize,
    pub c_num: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
    pub asymmetry: f64,
    pub positive_semidefinite: bool,
    pub smallest_eigenvalues: Vec<f64>,
}

impl Gramian {
    /// Numerical observability constant `λ_min(G)`.
    pub fn c_num(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Eigenvalues all at least `-1e-10 trace / m`.
    pub fn is_psd(&self) -> bool {
        self.c_num() >= -1e-10 * self.trace() / self.dimension() as f64
    }

    /// Basis coefficients `⟨s_i, u⟩_h`.
    pub fn coefficients(&self, u: &[f64]) -> Result<DVector<f64>, LabError> {
        if u.len() != self.grid.nodes {
            return Err(LabError::DimensionMismatch { expected: self.grid.nodes, got: u.len() });
        }
        Ok(self.basis.tr_mul(&DVector::from_column_slice(u)) * self.grid.h)
    }

    /// `cᵀ G c` for the basis coefficients of `u`.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64, LabError> {
        let c = self.coefficients(u)?;
        Ok(c.dot(&(&self.matrix * &c)))
    }

    /// The least-observed state `Σ v_i s_i`.
    pub fn min_state(&self) -> Vec<f64> {
        (&self.basis * &self.min_eigenvector).as_slice().to_vec()
    }

    pub fn summary(&self) -> GramianSummary {
        GramianSummary {
            length: self.grid.length,
            nodes: self.grid.nodes,
            time: self.time,
            dt: self.dt,
            basis: self.options.basis,
            scheme: self.options.scheme,
            dimension: self.dimension(),
            c_num: self.c_num(),
            max_eigenvalue: *self.eigenvalues.last().expect("non-empty"),
            trace: self.trace(),
            asymmetry: self.asymmetry,
            positive_semidefinite: self.is_psd(),
            smallest_eigenvalues: self.eigenvalues.iter().take(5).copied().collect(),
        }
    }
}

fn basis_matrix(grid: &Grid, dt: f64, basis: Basis) -> DMatrix<f64> {
    let n = grid.nodes;
    match basis {
        Basis::Nodal => DMatrix::identity(n, n) / grid.h.sqrt(),
        Basis::FilteredSine => {
            let modes: Vec<usize> = (1..=n / 2)
                .filter(|&m| {
                    let k = m as f64 * PI / grid.length;
                    (k * k * k + k) * dt <= 2.0
                })
                .collect();
            // The discrete sine transform makes these exactly orthogonal; scale √(2/L).
            let s = (2.0 / grid.length).sqrt();
            DMatrix::from_fn(n, modes.len(), |i, j| {
                s * (modes[j] as f64 * PI * grid.x(i) / grid.length).sin()
            })
        }
    }
}

/// Assembles the Gramian over `[0, T]`. `T = 0` gives the single-sample form
/// `G = φ(0) φ(0)ᵀ` with unit weight.
pub fn assemble_gramian(op: &DiscreteOperator, time: f64, dt: f64, options: &GramianOptions) -> Result<Gramian, LabError> {
    let grid = op.grid;
    if !(time.is_finite() && time >= 0.0) {
        return Err(LabError::InvalidParameter(format!("time must be non-negative, got {time}")));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(LabError::InvalidParameter("dt must be positive".into()));
    }
    let steps = if time == 0.0 { 0 } else { Stepper::new(op, dt, options.scheme)?.steps_for(time)? };
    let work = grid.nodes as u64 * steps.max(1) as u64;
    if work > options.budget {
        return Err(LabError::ResourceGuard { work, budget: options.budget });
    }
    let basis = basis_matrix(&grid, dt, options.basis);
    let m = basis.ncols();
    if m == 0 {
        return Err(LabError::InvalidParameter("time step filters out every basis mode".into()));
    }
    let weights = if steps == 0 { vec![1.0] } else { trapezoid_weights(steps + 1, dt) };

    let adjoint = Stepper::new(&op.transpose(), dt, options.scheme)?;
    let mut r = vec![0.0; grid.nodes];
    r[0] = 2.0 / grid.h;
    r[1] = -0.5 / grid.h;
    let mut next = vec![0.0; grid.nodes];
    // Row k holds √w_k φ(t_k) for all basis states.
    let mut traces = DMatrix::<f64>::zeros(steps + 1, m);
    for (k, w) in weights.iter().enumerate() {
        let rv = DVector::from_column_slice(&r);
        let phi = basis.tr_mul(&rv);
        let sw = w.sqrt();
        for j in 0..m {
            traces[(k, j)] = sw * phi[j];
        }
        if k < steps {
            adjoint.step(&r, &mut next);
            std::mem::swap(&mut r, &mut next);
        }
    }
    let raw = traces.tr_mul(&traces);
    let asymmetry = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (raw[(i, j)] - raw[(j, i)]).abs())
        .fold(0.0, f64::max);
    let matrix = (&raw + raw.transpose()) * 0.5;
    let (eigenvalues, min_eigenvector) = min_eigen(&matrix);
    Ok(Gramian {
        grid,
        time,
        dt,
        steps,
        options: options.clone(),
        basis,
        matrix,
        eigenvalues,
        min_eigenvector,
        asymmetry,
    })
}

fn min_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vec = eig.eigenvectors.column(order[0]).into_owned();
    (values, vec)
}

/// Smallest eigenvalue of `G` on the orthogonal complement of `span(m)`, with
/// `m` projected onto the Gramian basis.
pub fn restricted_constant(gram: &Gramian, m: &SubspaceM) -> Result<f64, LabError> {
    let grid = gram.grid;
    if m.basis.is_empty() {
        return Ok(gram.c_num());
    }
    if let Some(v) = m.basis.iter().find(|v| v.len() != grid.nodes) {
        return Err(LabError::DimensionMismatch { expected: grid.nodes, got: v.len() });
    }
    let dim = gram.dimension();
    // Coefficient vectors, orthonormalized in the Euclidean product of R^m.
    let coeffs: Vec<Vec<f64>> = m
        .basis
        .iter()
        .map(|v| gram.coefficients(v).map(|c| c.as_slice().to_vec()))
        .collect::<Result<_, _>>()?;
    let unit = Grid { length: 1.0, nodes: dim, h: 1.0 };
    let (q, _) = orthonormalize(&unit, &coeffs, 1e-8);
    if q.len() >= dim {
        return Err(LabError::NothingToObserve(dim));
    }
    if q.is_empty() {
        return Ok(gram.c_num());
    }
    let qm = DMatrix::from_fn(dim, q.len(), |i, j| q[j][i]);
    let proj = DMatrix::identity(dim, dim) - &qm * qm.transpose();
    let shift = gram.trace().abs() + 1.0;
    let deflated = &proj * &gram.matrix * &proj + &qm * qm.transpose() * shift;
    let (values, _) = min_eigen(&((&deflated + deflated.transpose()) * 0.5));
    Ok(values[0])
}
