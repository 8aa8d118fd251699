use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use obscost_kdv::{dot, Grid};
use serde::{Deserialize, Serialize};

/// A complex eigenvalue in serializable form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eig {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Eig {
    fn from(z: Complex64) -> Self {
        Eig { re: z.re, im: z.im }
    }
}

impl From<Eig> for Complex64 {
    fn from(e: Eig) -> Self {
        Complex64::new(e.re, e.im)
    }
}

pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Modified Gram–Schmidt with one reorthogonalization pass in the `h`-product.
/// Vectors whose remaining norm falls below `drop_tol` times their input norm are
/// discarded. Returns the orthonormal vectors and, for each kept input, the norm
/// of its orthogonalized remainder.
pub(crate) fn orthonormalize(grid: &Grid, vecs: &[Vec<f64>], drop_tol: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vecs.len());
    let mut norms = Vec::with_capacity(vecs.len());
    for v in vecs {
        let n0 = dot(grid, v, v).sqrt();
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(grid, &w, q);
                axpy(&mut w, -c, q);
            }
        }
        let n = dot(grid, &w, &w).sqrt();
        if n <= drop_tol * n0 {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= n);
        out.push(w);
        norms.push(n);
    }
    (out, norms)
}

/// `max |⟨q_i, q_j⟩ - δ_ij|`.
pub fn orthonormality_error(grid: &Grid, q: &[Vec<f64>]) -> f64 {
    let mut e: f64 = 0.0;
    for i in 0..q.len() {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            e = e.max((dot(grid, &q[i], &q[j]) - target).abs());
        }
    }
    e
}

/// Removes the components along the orthonormal `basis`.
pub(crate) fn project_out(grid: &Grid, v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(grid, &w, q);
            axpy(&mut w, -c, q);
        }
    }
    w
}

/// Unit vector spanning the numerical null space of a small complex matrix.
pub(crate) fn null_vector(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    v_t.row(idx).adjoint().into_owned()
}

/// Complex `h`-norm.
pub(crate) fn c_norm(grid: &Grid, v: &[Complex64]) -> f64 {
    (grid.h * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}
