//! Flow-based Gram–Schmidt construction of a near-invariant, flux-small family.
//!
//! Starting from `y_1 = L S(t₁) u₀` the family grows by `L Π⊥ A y_last` until the
//! projected residual drops below `γ/2`. Between levels every member is smoothed by
//! `S(t̄)` with `t̄ ∈ [t₁, 2t₁]` chosen to minimize the summed squared boundary
//! traces, then re-orthonormalized. Flux budgets follow the `c_n` recursion.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use obscost_core::epsilon::c_next;
use obscost_core::{CoreError, XReal};
use obscost_kdv::{dot, h_norm, DiscreteOperator, EvolveOptions, Scheme, Stepper};
use serde::{Deserialize, Serialize};

use crate::bgamma::{b_gamma_check, BGammaDiagnostics};
use crate::error::LabError;
use crate::linalg::{c_norm, null_vector, orthonormalize, orthonormality_error, project_out, Eig};

/// Largest accepted `level_cap`.
pub const MAX_LEVEL_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum KTilde {
    /// `max(‖A y₁‖, ‖A² y₁‖)` for the first family member.
    Measured,
    Given(XReal),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSchmidtParams {
    pub gamma: f64,
    pub t1: f64,
    /// `δ_ℓ` is entry `ℓ - 1`, the last entry repeating.
    pub deltas: Vec<f64>,
    pub level_cap: usize,
    pub samples: usize,
    pub dt: f64,
    pub scheme: Scheme,
    pub ktilde: KTilde,
    /// H³ radius used for the `B_γ` check of the candidate.
    pub radius: XReal,
    /// Flux horizon; defaults to `(3 level_cap - 1) t₁`.
    pub horizon: Option<f64>,
}

impl GramSchmidtParams {
    pub fn new(gamma: f64, t1: f64, level_cap: usize, radius: XReal) -> Self {
        GramSchmidtParams {
            gamma,
            t1,
            deltas: vec![t1.min(0.5) / 4.0],
            level_cap,
            samples: 64,
            dt: 1e-3,
            scheme: Scheme::Trapezoidal,
            ktilde: KTilde::Measured,
            radius,
            horizon: None,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or((3 * self.level_cap - 1) as f64 * self.t1)
    }

    fn delta(&self, level: usize) -> f64 {
        self.deltas[(level - 1).min(self.deltas.len() - 1)]
    }

    fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if !(self.gamma > 0.0) {
            return bad("gamma must be positive".into());
        }
        if !(self.t1 > 0.0 && self.dt > 0.0) {
            return bad("t1 and dt must be positive".into());
        }
        if self.level_cap == 0 || self.level_cap > MAX_LEVEL_CAP {
            return bad(format!("level_cap must lie in 1..={MAX_LEVEL_CAP}"));
        }
        if self.samples < 2 {
            return bad("at least two samples of [t1, 2 t1] are needed".into());
        }
        let upper = self.t1.min(0.5);
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && *d < upper)) {
            return bad(format!("every delta must lie in (0, {upper})"));
        }
        if ((self.t1 / self.dt).round() * self.dt - self.t1).abs() > 1e-9 * self.t1 {
            return bad("t1 must be a multiple of dt".into());
        }
        if self.horizon() < self.t1 {
            return bad("horizon shorter than t1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    ResidualBelowHalfGamma,
    /// The cap was reached after a level violated its flux-budget hypotheses.
    BudgetExceeded,
    LevelCap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub orthonormality_error: f64,
    /// `c_{ℓ-1}`, the flux budget of this level's members.
    pub budget: XReal,
    /// Flux window `T₀ - (3ℓ - 2) t₁` over which member fluxes are measured.
    pub window: f64,
    pub member_fluxes: Vec<f64>,
    /// Every member flux at most `2 c_{ℓ-1}`.
    pub flux_within_budget: bool,
    /// `|(y_i)_x(0)|`.
    pub boundary_traces: Vec<f64>,
    /// `(3/2) √(ℓ c_{ℓ-1} / t₁) < γ / √B` with `B = level_cap`.
    pub budget_condition: bool,
    /// `ℓ c_{ℓ-1} < min(1/18, 1/(2(ℓ-1)))`.
    pub lemma_hypothesis: bool,
    /// `‖Π⊥_{y_1..y_{ℓ-1}} A y_ℓ‖`.
    pub residual_norm: f64,
    /// Set when the run continues past this level.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<Transition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub delta: f64,
    pub t_bar: f64,
    /// `Σ_i (S(t̄) y_i)_x(0)²` at the chosen sample.
    pub trace_sum: f64,
    /// `max_i Σ_{k<i} |a_ki|` for the unit upper-triangular orthogonalizer.
    pub triangular_offdiag: f64,
    /// Projection contraction `‖Π⊥_{S V} S f‖ <= ‖Π⊥_V f‖` for the new member `f`.
    pub contraction_lhs: f64,
    pub contraction_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub lambda: Eig,
    pub state_re: Vec<f64>,
    pub state_im: Vec<f64>,
    /// `‖λ g - A_h g‖_h`.
    pub residual: f64,
    /// `|g_x(0)|`.
    pub flux: f64,
    pub diagnostics: BGammaDiagnostics,
}

impl Candidate {
    pub fn state(&self) -> Vec<Complex64> {
        self.state_re.iter().zip(&self.state_im).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSchmidtRun {
    pub params: GramSchmidtParams,
    pub length: f64,
    pub nodes: usize,
    /// `ε = ∫_0^{T₀} (S(s)u₀)_x(0)² ds`.
    pub initial_flux: f64,
    pub ktilde: XReal,
    pub levels: Vec<LevelRecord>,
    pub stop_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    /// Final orthonormal family.
    pub family: Vec<Vec<f64>>,
}

impl GramSchmidtRun {
    pub fn max_orthonormality_error(&self) -> f64 {
        self.levels.iter().map(|l| l.orthonormality_error).fold(0.0, f64::max)
    }
}

fn flux_integral(stepper: &Stepper, u: &[f64], window: f64) -> Result<f64, LabError> {
    let steps = (window / stepper.dt).round() as usize;
    if steps == 0 {
        return Ok(0.0);
    }
    Ok(stepper.run(u, steps, &EvolveOptions::default())?.flux_integral())
}

fn xr(v: f64) -> XReal {
    XReal::from_f64(v)
}

pub fn gram_schmidt_procedure(op: &DiscreteOperator, u0: &[f64], params: &GramSchmidtParams) -> Result<GramSchmidtRun, LabError> {
    params.validate()?;
    let grid = op.grid;
    if u0.len() != grid.nodes {
        return Err(LabError::DimensionMismatch { expected: grid.nodes, got: u0.len() });
    }
    let n0 = h_norm(&grid, u0);
    if (n0 - 1.0).abs() > 1e-9 {
        return Err(LabError::InvalidParameter(format!("initial state has norm {n0}, expected 1")));
    }
    let p = params;
    let stepper = Stepper::new(op, p.dt, p.scheme)?;
    let apply = |u: &[f64]| op.apply(u).expect("grid checked");
    let horizon = p.horizon();
    let t1_steps = (p.t1 / p.dt).round() as usize;
    let cap = p.level_cap;

    let initial_flux = flux_integral(&stepper, u0, horizon)?;
    let mut y1 = u0.to_vec();
    stepper.advance(&mut y1, t1_steps);
    let (mut family, _) = orthonormalize(&grid, &[y1], 0.0);
    if family.is_empty() {
        return Err(LabError::InvalidParameter("S(t1) u0 vanished".into()));
    }

    let ktilde = match &p.ktilde {
        KTilde::Given(k) => k.clone(),
        KTilde::Measured => {
            let a1 = apply(&family[0]);
            xr(h_norm(&grid, &a1).max(h_norm(&grid, &apply(&a1))))
        }
    };
    let gamma = xr(p.gamma);
    let sqrt_b = (cap as f64).sqrt();

    let mut budget = xr(initial_flux);
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut hypotheses_ok = true;
    let (stop_reason, candidate) = loop {
        let level = family.len();
        let window = horizon - (3 * level - 2) as f64 * p.t1;
        let member_fluxes = family
            .iter()
            .map(|y| flux_integral(&stepper, y, window.max(0.0)))
            .collect::<Result<Vec<_>, _>>()?;
        let two_c = xr(2.0) * &budget;
        let flux_within_budget = member_fluxes.iter().all(|f| xr(*f) <= two_c);
        let ell = xr(level as f64);
        let trace_bound = xr(1.5) * (&ell * &budget / xr(p.t1)).sqrt().map_err(CoreError::from)?;
        let budget_condition = trace_bound < xr(p.gamma / sqrt_b);
        let lemma_cap = if level == 1 { 1.0 / 18.0 } else { (1.0 / 18.0f64).min(1.0 / (2.0 * (level - 1) as f64)) };
        let lemma_hypothesis = &ell * &budget < xr(lemma_cap);
        hypotheses_ok &= budget_condition && lemma_hypothesis;

        let last = &family[level - 1];
        let residual = project_out(&grid, &apply(last), &family[..level - 1]);
        let residual_norm = h_norm(&grid, &residual);
        levels.push(LevelRecord {
            level,
            orthonormality_error: orthonormality_error(&grid, &family),
            budget: budget.clone(),
            window,
            member_fluxes,
            flux_within_budget,
            boundary_traces: family.iter().map(|y| op.flux(y).abs()).collect(),
            budget_condition,
            lemma_hypothesis,
            residual_norm,
            transition: None,
        });

        if residual_norm < 0.5 * p.gamma {
            let cand = candidate(op, &family, p)?;
            break (StopReason::ResidualBelowHalfGamma, Some(cand));
        }
        if level >= cap {
            let reason = if hypotheses_ok { StopReason::LevelCap } else { StopReason::BudgetExceeded };
            break (reason, None);
        }

        // Grow, smooth and re-orthonormalize.
        let delta = p.delta(level);
        budget = c_next((level - 1) as u64, &budget, &xr(delta), &gamma, &ktilde)?;
        let mut z = family.clone();
        let mut newest = residual;
        newest.iter_mut().for_each(|v| *v /= residual_norm);
        z.push(newest);

        let span = 2 * t1_steps;
        let runs = z
            .iter()
            .map(|y| stepper.run(y, span, &EvolveOptions::default()))
            .collect::<Result<Vec<_>, _>>()?;
        let (best_step, trace_sum) = (0..p.samples)
            .map(|j| t1_steps + ((j * t1_steps) as f64 / (p.samples - 1) as f64).round() as usize)
            .map(|s| (s, runs.iter().map(|r| r.flux[s] * r.flux[s]).sum::<f64>()))
            .fold((t1_steps, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        let g: Vec<Vec<f64>> = z
            .iter()
            .map(|y| {
                let mut u = y.clone();
                stepper.advance(&mut u, best_step);
                u
            })
            .collect();
        let (next, norms) = orthonormalize(&grid, &g, 1e-12);
        if next.len() < g.len() {
            return Err(LabError::InvalidParameter(format!("family became dependent at level {level}")));
        }
        let triangular_offdiag = triangular_offdiag(&grid, &g, &next);
        // Observation (vii) with V = span of the old members and f the new one.
        let contraction_lhs = norms[level];
        let contraction_rhs = 1.0;
        let rec = levels.last_mut().expect("pushed above");
        rec.transition = Some(Transition {
            delta,
            t_bar: best_step as f64 * p.dt,
            trace_sum,
            triangular_offdiag,
            contraction_lhs,
            contraction_rhs,
        });
        family = next;
    };

    Ok(GramSchmidtRun {
        params: p.clone(),
        length: grid.length,
        nodes: grid.nodes,
        initial_flux,
        ktilde,
        levels,
        stop_reason,
        candidate,
        family,
    })
}

/// Coefficients `a_ki` with `h_i = Σ_k a_ki g_k`, `a_ii = 1`, from `R = Yᵀ G`.
fn triangular_offdiag(grid: &obscost_kdv::Grid, g: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let m = g.len();
    let r = DMatrix::from_fn(m, m, |k, i| if k <= i { dot(grid, &y[k], &g[i]) } else { 0.0 });
    let Some(rinv) = r.clone().try_inverse() else {
        return f64::INFINITY;
    };
    (0..m)
        .map(|i| (0..i).map(|k| (rinv[(k, i)] * r[(i, i)]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenpair of the projected operator minimizing `‖λ g - A g‖`.
fn candidate(op: &DiscreteOperator, family: &[Vec<f64>], p: &GramSchmidtParams) -> Result<Candidate, LabError> {
    let grid = op.grid;
    let m = family.len();
    let af: Vec<Vec<f64>> = family.iter().map(|y| op.apply(y).expect("grid checked")).collect();
    let proj = DMatrix::from_fn(m, m, |i, j| dot(&grid, &family[i], &af[j]));
    let eigs = Schur::try_new(proj.clone(), 1e-14, 10_000)
        .ok_or_else(|| LabError::Eigensolver("projected eigenproblem did not converge".into()))?
        .complex_eigenvalues();
    let pc = proj.map(|v| Complex64::new(v, 0.0));
    let mut best: Option<(f64, Complex64, Vec<Complex64>)> = None;
    for &lam in eigs.iter() {
        let shifted = &pc - DMatrix::<Complex64>::identity(m, m) * lam;
        let c = null_vector(&shifted);
        let mut g = vec![Complex64::new(0.0, 0.0); grid.nodes];
        for (k, y) in family.iter().enumerate() {
            for (gi, yi) in g.iter_mut().zip(y) {
                *gi += c[k] * yi;
            }
        }
        let nrm = c_norm(&grid, &g);
        g.iter_mut().for_each(|z| *z /= nrm);
        // Fix the phase so the largest entry is real and positive.
        let pivot = g.iter().copied().fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
        if pivot.norm() > 0.0 {
            let ph = pivot.conj() / pivot.norm();
            g.iter_mut().for_each(|z| *z *= ph);
        }
        let re: Vec<f64> = g.iter().map(|z| z.re).collect();
        let im: Vec<f64> = g.iter().map(|z| z.im).collect();
        let (are, aim) = (op.apply(&re)?, op.apply(&im)?);
        let r: Vec<Complex64> =
            g.iter().zip(are.iter().zip(&aim)).map(|(z, (x, y))| lam * z - Complex64::new(*x, *y)).collect();
        let res = c_norm(&grid, &r);
        if best.as_ref().is_none_or(|b| res < b.0) {
            best = Some((res, lam, g));
        }
    }
    let (residual, lambda, g) = best.ok_or_else(|| LabError::Eigensolver("empty projected spectrum".into()))?;
    let diagnostics = b_gamma_check(op, &g, lambda, &p.radius, p.gamma)?;
    let re: Vec<f64> = g.iter().map(|z| z.re).collect();
    let im: Vec<f64> = g.iter().map(|z| z.im).collect();
    let flux = Complex64::new(op.flux(&re), op.flux(&im)).norm();
    Ok(Candidate { lambda: lambda.into(), state_re: re, state_im: im, residual, flux, diagnostics })
}
