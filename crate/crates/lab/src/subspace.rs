//! Flux-invisible invariant subspace `M` of `A_h`: eigenvectors with `|Re λ| < tol`
//! whose boundary flux is below `tol`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use obscost_kdv::{dot, h_norm, DiscreteOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::linalg::{c_norm, orthonormalize, project_out, Eig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberInfo {
    /// `|v_x(0)|` for the unit vector `v`.
    pub flux: f64,
    /// `‖A v - Π_M A v‖_h`.
    pub invariance_residual: f64,
    /// `⟨A v, v⟩_h`.
    pub rayleigh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceM {
    pub length: f64,
    pub nodes: usize,
    pub tol: f64,
    /// `h`-orthonormal real basis.
    pub basis: Vec<Vec<f64>>,
    /// The selected eigenvalues, conjugates included.
    pub eigenvalues: Vec<Eig>,
    /// `‖A x - λ x‖_h` for the unit complex eigenvector of each selected eigenvalue.
    pub eigen_residuals: Vec<f64>,
    pub members: Vec<MemberInfo>,
    /// Number of eigenvalues with `|Re λ| < tol` before the flux filter.
    pub candidates: usize,
}

impl SubspaceM {
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Distance from `z` to the nearest recorded eigenvalue.
    pub fn distance_to_spectrum(&self, z: Complex64) -> f64 {
        self.eigenvalues.iter().map(|e| (Complex64::from(*e) - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

struct Cluster {
    center: Complex64,
    members: Vec<Complex64>,
}

fn clusters(selected: &[Complex64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for &z in selected {
        let tol = 1e-6 * (1.0 + z.norm());
        match out.iter_mut().find(|c| (c.center - z).norm() <= tol) {
            Some(c) => c.members.push(z),
            None => out.push(Cluster { center: z, members: vec![z] }),
        }
    }
    out
}

/// Block inverse iteration for the invariant subspace of one eigenvalue cluster.
fn cluster_vectors(a: &DMatrix<Complex64>, cl: &Cluster, scale: f64) -> Result<Vec<DVector<Complex64>>, LabError> {
    let n = a.nrows();
    let p = cl.members.len();
    let shift = cl.center + Complex64::new(1e-9 * scale, 1e-9 * scale);
    let shifted = a - DMatrix::<Complex64>::identity(n, n) * shift;
    let lu = shifted.lu();
    // Deterministic, generic start block.
    let mut x = DMatrix::<Complex64>::from_fn(n, p, |i, j| {
        let t = (i * (j + 3) + 7 * j) as f64;
        Complex64::new((0.37 * t + 0.11).sin(), (0.23 * t + 0.5).cos())
    });
    for _ in 0..3 {
        x = lu.solve(&x).ok_or_else(|| LabError::Eigensolver("singular shifted system".into()))?;
        if x.iter().any(|z| !z.is_finite()) {
            return Err(LabError::Eigensolver("non-finite iterate".into()));
        }
        x = x.qr().q();
    }
    Ok((0..p).map(|j| x.column(j).into_owned()).collect())
}

pub fn uncontrollable_subspace(op: &DiscreteOperator, tol: f64) -> Result<SubspaceM, LabError> {
    if !(tol > 0.0) {
        return Err(LabError::InvalidParameter("tol must be positive".into()));
    }
    let grid = op.grid;
    let n = grid.nodes;
    let dense = op.to_dense();
    let a = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let scale = a.norm().max(1.0);
    // QR iteration does not converge on the zero matrix; its spectrum is known.
    let mut eigs: Vec<Complex64> = if a.amax() == 0.0 {
        vec![Complex64::new(0.0, 0.0); n]
    } else {
        Schur::try_new(a.clone(), 1e-14, 100 * n)
            .ok_or_else(|| LabError::Eigensolver("QR iteration did not converge".into()))?
            .complex_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let candidates: Vec<Complex64> = eigs.iter().copied().filter(|z| z.re.abs() < tol).collect();
    // One representative per conjugate pair.
    let upper: Vec<Complex64> = candidates.iter().copied().filter(|z| z.im >= -1e-12 * scale).collect();
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let cls = clusters(&upper);
    let per_cluster: Vec<(Cluster, Vec<DVector<Complex64>>)> = cls
        .into_par_iter()
        .map(|cl| cluster_vectors(&ac, &cl, scale).map(|v| (cl, v)))
        .collect::<Result<_, _>>()?;

    let flux = |v: &[f64]| op.flux(v);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut eigen_residuals = Vec::new();
    for (cl, vecs) in &per_cluster {
        // Real invariant subspace from real and imaginary parts.
        let mut real: Vec<Vec<f64>> = Vec::new();
        for v in vecs {
            real.push(v.iter().map(|z| z.re).collect());
            if cl.center.im.abs() > 0.0 {
                real.push(v.iter().map(|z| z.im).collect());
            } else {
                let im: Vec<f64> = v.iter().map(|z| z.im).collect();
                if h_norm(&grid, &im) > 1e-8 * c_norm(&grid, v.as_slice()) {
                    real.push(im);
                }
            }
        }
        let (w, _) = orthonormalize(&grid, &real, 1e-8);
        if w.is_empty() {
            continue;
        }
        // Rotate so the flux sits on one direction; its complement is flux-free.
        let f: Vec<f64> = w.iter().map(|v| flux(v)).collect();
        let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rotated: Vec<Vec<f64>> = Vec::new();
        let lead: Vec<f64> = if fnorm > 0.0 {
            let mut d = vec![0.0; n];
            for (vi, fi) in w.iter().zip(&f) {
                crate::linalg::axpy(&mut d, fi / fnorm, vi);
            }
            d
        } else {
            w[0].clone()
        };
        rotated.push(lead.clone());
        rotated.extend(w.iter().cloned());
        let (basis, _) = orthonormalize(&grid, &rotated, 1e-8);
        let keep_lead = fnorm < tol;
        let mut any = false;
        for (i, v) in basis.into_iter().enumerate() {
            if i == 0 && !keep_lead {
                continue;
            }
            kept.push(v);
            any = true;
        }
        if any {
            for v in vecs {
                let u = v.as_slice();
                let xn = c_norm(&grid, u);
                let av = &ac * v;
                let r: Vec<Complex64> = av.iter().zip(u).map(|(p, q)| p - cl.center * q).collect();
                eigen_residuals.push(c_norm(&grid, &r) / xn);
            }
            for &lam in &cl.members {
                eigenvalues.push(Eig::from(lam));
                if lam.im.abs() > 0.0 {
                    eigenvalues.push(Eig::from(lam.conj()));
                }
            }
        }
    }
    let (basis, _) = orthonormalize(&grid, &kept, 1e-8);
    let members = basis
        .iter()
        .map(|v| {
            let av = op.apply(v).expect("grid checked");
            MemberInfo {
                flux: flux(v).abs(),
                invariance_residual: h_norm(&grid, &project_out(&grid, &av, &basis)),
                rayleigh: dot(&grid, &av, v),
            }
        })
        .collect();
    Ok(SubspaceM {
        length: grid.length,
        nodes: n,
        tol,
        basis,
        eigenvalues,
        eigen_residuals,
        members,
        candidates: candidates.len(),
    })
}
