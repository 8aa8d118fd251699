use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::{BandLu, BandMatrix};
use crate::error::KdvError;
use crate::grid::Grid;
use crate::norms::{dot, trapezoid_weights};
use crate::operator::{flux, DiscreteOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImplicitEuler,
    Trapezoidal,
}

impl Scheme {
    pub fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::Trapezoidal => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit-euler",
            Scheme::Trapezoidal => "trapezoidal",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = KdvError;

    fn from_str(s: &str) -> Result<Self, KdvError> {
        match s.trim() {
            "implicit-euler" | "euler" | "be" => Ok(Scheme::ImplicitEuler),
            "trapezoidal" | "crank-nicolson" | "cn" => Ok(Scheme::Trapezoidal),
            other => Err(KdvError::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// One θ-step `(I - θ dt A) u⁺ = (I + (1-θ) dt A) u`, factorized once.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: Grid,
    pub scheme: Scheme,
    pub dt: f64,
    explicit: Option<BandMatrix>,
    lu: BandLu,
}

impl Stepper {
    pub fn new(op: &DiscreteOperator, dt: f64, scheme: Scheme) -> Result<Self, KdvError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(KdvError::NonPositive("dt"));
        }
        let theta = scheme.theta();
        let lhs = op.matrix().scaled_shift(-theta * dt, 1.0);
        let lu = lhs.factor().map_err(|column| KdvError::SingularFactorization {
            column,
            nodes: op.grid.nodes,
            h: op.grid.h,
            dt,
        })?;
        let explicit = (theta < 1.0).then(|| op.matrix().scaled_shift((1.0 - theta) * dt, 1.0));
        Ok(Stepper { grid: op.grid, scheme, dt, explicit, lu })
    }

    /// Writes one step of `u` into `out`.
    pub fn step(&self, u: &[f64], out: &mut [f64]) {
        match &self.explicit {
            Some(b) => b.mul_vec(u, out),
            None => out.copy_from_slice(u),
        }
        self.lu.solve_in_place(out);
    }

    /// Applies `steps` steps in place.
    pub fn advance(&self, u: &mut Vec<f64>, steps: usize) {
        let mut tmp = vec![0.0; u.len()];
        for _ in 0..steps {
            self.step(u, &mut tmp);
            std::mem::swap(u, &mut tmp);
        }
    }

    /// Number of steps covering `[0, t]`; `t` must be a multiple of `dt`.
    pub fn steps_for(&self, t: f64) -> Result<usize, KdvError> {
        steps_for(t, self.dt)
    }

    pub fn run(&self, u0: &[f64], steps: usize, opts: &EvolveOptions) -> Result<StateTrajectory, KdvError> {
        self.grid.check(u0)?;
        let g = &self.grid;
        let mut flux_samples = Vec::with_capacity(steps + 1);
        let mut energy = Vec::with_capacity(steps + 1);
        let mut right_trace = Vec::with_capacity(steps + 1);
        let mut stored_steps = vec![0];
        let mut states = vec![u0.to_vec()];
        let mut u = u0.to_vec();
        let mut next = vec![0.0; u.len()];
        flux_samples.push(flux(g, &u));
        energy.push(dot(g, &u, &u));
        right_trace.push(u[u.len() - 1]);
        let mut max_excess: f64 = f64::NEG_INFINITY;
        for j in 0..steps {
            self.step(&u, &mut next);
            let f = flux(g, &next);
            let e = dot(g, &next, &next);
            let e_prev = energy[j];
            let mid = 0.5 * (flux_samples[j] + f);
            if e_prev > 0.0 {
                let excess = (e - e_prev + self.dt * mid * mid) / (self.dt * e_prev);
                max_excess = max_excess.max(excess);
            }
            flux_samples.push(f);
            energy.push(e);
            right_trace.push(next[next.len() - 1]);
            std::mem::swap(&mut u, &mut next);
            let last = j + 1 == steps;
            if last || opts.store_every.is_some_and(|k| k > 0 && (j + 1) % k == 0) {
                stored_steps.push(j + 1);
                states.push(u.clone());
            }
        }
        Ok(StateTrajectory {
            grid: *g,
            scheme: self.scheme,
            dt: self.dt,
            steps,
            flux: flux_samples,
            energy,
            right_trace,
            stored_steps,
            states,
            max_energy_excess: if max_excess.is_finite() { max_excess } else { 0.0 },
        })
    }
}

pub(crate) fn steps_for(t: f64, dt: f64) -> Result<usize, KdvError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(KdvError::NonPositive("dt"));
    }
    if !(t.is_finite() && t >= dt * (1.0 - 1e-12)) {
        return Err(KdvError::HorizonTooShort { t, dt });
    }
    let steps = (t / dt).round();
    if (steps * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(KdvError::InvalidParameter(format!("time {t} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Keep every k-th state; `None` keeps only the first and last.
    pub store_every: Option<usize>,
}

impl EvolveOptions {
    pub fn every(k: usize) -> Self {
        EvolveOptions { store_every: Some(k) }
    }
}

/// Output of a time integration. Flux and energy are sampled at every step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub grid: Grid,
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    /// `φ_j ≈ u_x(t_j, 0)` for `j = 0..=steps`.
    pub flux: Vec<f64>,
    /// `‖u_j‖²_h` for `j = 0..=steps`.
    pub energy: Vec<f64>,
    /// Last interior value `u_N` for `j = 0..=steps`.
    pub right_trace: Vec<f64>,
    pub stored_steps: Vec<usize>,
    pub states: Vec<Vec<f64>>,
    /// Largest `(‖u_{j+1}‖² - ‖u_j‖² + dt φ_{j+½}²) / (dt ‖u_j‖²)` over all steps.
    pub max_energy_excess: f64,
}

impl StateTrajectory {
    pub fn final_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| j as f64 * self.dt).collect()
    }

    pub fn stored_times(&self) -> Vec<f64> {
        self.stored_steps.iter().map(|&j| j as f64 * self.dt).collect()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.steps + 1, self.dt)
    }

    /// Trapezoidal `∫_0^T φ² dt`.
    pub fn flux_integral(&self) -> f64 {
        self.flux_integral_until(self.steps)
    }

    /// Trapezoidal `∫_0^{t_j} φ² dt`.
    pub fn flux_integral_until(&self, step: usize) -> f64 {
        let step = step.min(self.steps);
        trapezoid_weights(step + 1, self.dt).iter().zip(&self.flux).map(|(w, f)| w * f * f).sum()
    }

    /// `|‖u(T)‖² + ∫φ² - ‖u_0‖²| / ‖u_0‖²`.
    pub fn energy_residual(&self) -> f64 {
        let e0 = self.energy[0];
        if e0 == 0.0 {
            return 0.0;
        }
        (self.energy[self.steps] + self.flux_integral() - e0).abs() / e0
    }

    /// Largest relative increase of `‖u_j‖` between consecutive steps.
    pub fn max_norm_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| (w[1].sqrt() - w[0].sqrt()) / w[0].sqrt())
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    }
}

/// Integrates `u_t = A_h u` from `u0` over `[0, t]`.
pub fn evolve(
    op: &DiscreteOperator,
    u0: &[f64],
    t: f64,
    dt: f64,
    scheme: Scheme,
    opts: &EvolveOptions,
) -> Result<StateTrajectory, KdvError> {
    op.grid.check(u0)?;
    let steps = steps_for(t, dt)?;
    Stepper::new(op, dt, scheme)?.run(u0, steps, opts)
}

/// Evolves several initial states in parallel with one shared factorization.
pub fn evolve_many(
    op: &DiscreteOperator,
    states: &[Vec<f64>],
    t: f64,
    dt: f64,
    scheme: Scheme,
    opts: &EvolveOptions,
) -> Result<Vec<StateTrajectory>, KdvError> {
    let steps = steps_for(t, dt)?;
    let stepper = Stepper::new(op, dt, scheme)?;
    states.par_iter().map(|u| stepper.run(u, steps, opts)).collect()
}
