//! Measured smoothing rate `‖S(t)u_0‖_{H^k} ~ t^{-k/2}` against the analytic bound.

use obscost_core::flow::FlowConstantSet;
use obscost_core::XReal;
use serde::{Deserialize, Serialize};

use crate::error::KdvError;
use crate::evolve::{Scheme, Stepper};
use crate::norms::{discrete_norm, h_norm};
use crate::operator::DiscreteOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingOptions {
    pub samples: usize,
    pub dt: f64,
    pub scheme: Scheme,
}

impl Default for SmoothingOptions {
    fn default() -> Self {
        SmoothingOptions { samples: 16, dt: 1e-5, scheme: Scheme::Trapezoidal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSample {
    pub t: f64,
    pub norm: f64,
    pub bound: XReal,
    pub below_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFit {
    pub order: usize,
    pub window: (f64, f64),
    pub slope: f64,
    /// `exp` of the fitted intercept: the `C` in `‖S(t)u_0‖ ≈ C t^{slope}`.
    pub constant: f64,
    pub samples: Vec<SmoothingSample>,
    pub all_below_bound: bool,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the slope of `log ‖S(t)u_0‖_{H^k}` over log-spaced times in `window`.
pub fn smoothing_rate_fit(
    op: &DiscreteOperator,
    u0: &[f64],
    k: usize,
    window: (f64, f64),
    flow: &FlowConstantSet,
    opts: &SmoothingOptions,
) -> Result<SmoothingFit, KdvError> {
    let g = op.grid;
    g.check(u0)?;
    if k > 3 {
        return Err(KdvError::OrderTooHigh(k));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi <= g.length) {
        return Err(KdvError::InvalidParameter(format!("window [{lo}, {hi}] outside (0, L]")));
    }
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return Err(KdvError::WindowTooNarrow { lo, hi });
    }
    if opts.samples < 3 {
        return Err(KdvError::InvalidParameter("at least 3 samples are needed".into()));
    }
    let n0 = h_norm(&g, u0);
    if (n0 - 1.0).abs() > 1e-9 {
        return Err(KdvError::InvalidParameter(format!("initial state has norm {n0}, expected 1")));
    }
    let stepper = Stepper::new(op, opts.dt, opts.scheme)?;
    let ratio = (hi / lo).ln();
    let targets: Vec<usize> = (0..opts.samples)
        .map(|i| {
            let t = lo * (ratio * i as f64 / (opts.samples - 1) as f64).exp();
            ((t / opts.dt).round() as usize).max(1)
        })
        .collect();
    let mut u = u0.to_vec();
    let mut done = 0usize;
    let mut samples = Vec::with_capacity(targets.len());
    for &target in &targets {
        stepper.advance(&mut u, target - done);
        done = target;
        let t = target as f64 * opts.dt;
        let norm = discrete_norm(&u, k, &g)?;
        let bound = if k == 0 { XReal::one() } else { flow.smoothing_bound(k, t)? };
        let below_bound = XReal::from_f64(norm) <= bound;
        samples.push(SmoothingSample { t, norm, bound, below_bound });
    }
    let x: Vec<f64> = samples.iter().map(|s| s.t.ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.norm.ln()).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    Ok(SmoothingFit {
        order: k,
        window,
        slope,
        constant: intercept.exp(),
        all_below_bound: samples.iter().all(|s| s.below_bound),
        samples,
    })
}
