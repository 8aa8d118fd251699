//! Numerical checks of the flow observations used by the Gram–Schmidt argument:
//! energy window, difference quotients, flux of `A S(t) f`, near-orthogonality of
//! `S(t)f` and `A S(t) f`, preserved orthogonality and projection contraction.

use serde::{Deserialize, Serialize};

use crate::error::KdvError;
use crate::evolve::{steps_for, EvolveOptions, Scheme, Stepper};
use crate::norms::{dot, h_norm};
use crate::operator::DiscreteOperator;
use crate::smoothing::linear_fit;

/// Where `K̃` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum KTildeSource {
    /// `max(‖A S(s) f‖, ‖A² S(s) f‖)` over the sampled `s ∈ [t, t + δ]`.
    Measured,
    /// A supplied constant, e.g. the theory value (saturates to `inf` when huge).
    Given(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationParams {
    /// Evaluation time, `t >= t1`.
    pub t: f64,
    pub t1: f64,
    pub delta: f64,
    /// Horizon `T` of the flux integrals.
    pub horizon: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub ktilde: KTildeSource,
}

impl Default for ObservationParams {
    fn default() -> Self {
        ObservationParams {
            t: 0.5,
            t1: 0.25,
            delta: 0.02,
            horizon: 2.0,
            dt: 1e-4,
            scheme: Scheme::Trapezoidal,
            ktilde: KTildeSource::Measured,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationEntry {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
    /// Set when the configuration lies outside the range where the inequality is claimed.
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ObservationEntry {
    fn new(name: &str, value: f64, bound: f64, tol: f64) -> Self {
        ObservationEntry { name: name.into(), value, bound, holds: value <= bound + tol, flagged: false, note: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationReport {
    pub params: ObservationParams,
    pub ktilde: f64,
    pub flux_f: f64,
    pub flux_g: f64,
    /// Inner product of the supplied `g0` with `f0`; `g` is `g0` orthogonalized against `f0`.
    pub initial_overlap: f64,
    pub residual_slope: f64,
    pub residual_constant: f64,
    pub entries: Vec<ObservationEntry>,
}

impl ObservationReport {
    /// True when every unflagged entry holds.
    pub fn all_hold(&self) -> bool {
        self.entries.iter().filter(|e| !e.flagged).all(|e| e.holds)
    }

    pub fn entry(&self, name: &str) -> Option<&ObservationEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn sub_scaled(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - s * y).collect()
}

/// Distance of `‖u_j‖` from `[1 - a, 1]`, maximized over the trajectory.
fn window_excess(energy: &[f64], a: f64) -> f64 {
    energy
        .iter()
        .map(|e| {
            let n = e.sqrt();
            ((1.0 - a) - n).max(n - 1.0).max(0.0)
        })
        .fold(0.0, f64::max)
}

pub fn observation_checks(
    op: &DiscreteOperator,
    f0: &[f64],
    g0: &[f64],
    params: &ObservationParams,
) -> Result<ObservationReport, KdvError> {
    let grid = op.grid;
    grid.check(f0)?;
    grid.check(g0)?;
    let p = params;
    if !(p.t1 > 0.0 && p.t >= p.t1) {
        return Err(KdvError::InvalidParameter(format!("need 0 < t1 <= t, got t1 = {}, t = {}", p.t1, p.t)));
    }
    if !(p.delta > 0.0 && p.delta < p.t1.min(0.5)) {
        return Err(KdvError::InvalidParameter(format!("delta = {} outside (0, min(1/2, t1))", p.delta)));
    }
    if p.t + p.delta > p.horizon {
        return Err(KdvError::InvalidParameter("t + delta exceeds the horizon".into()));
    }
    let stepper = Stepper::new(op, p.dt, p.scheme)?;
    let n_t = steps_for(p.t, p.dt)?;
    let n_delta = steps_for(p.delta, p.dt)?;
    let n_horizon = steps_for(p.horizon, p.dt)?;
    if n_delta < 40 {
        return Err(KdvError::InvalidParameter("delta must span at least 40 steps".into()));
    }

    let overlap = dot(&grid, g0, f0);
    let mut g = sub_scaled(g0, f0, overlap);
    crate::states::normalize(&grid, &mut g);

    let tf = stepper.run(f0, n_horizon, &EvolveOptions::default())?;
    let tg = stepper.run(&g, n_horizon, &EvolveOptions::default())?;
    let a_f = tf.flux_integral();
    let a_g = tg.flux_integral();
    // States of f on [t, t + δ]; entry i is S(t + i dt) f.
    let near: Vec<Vec<f64>> = {
        let mut u = f0.to_vec();
        stepper.advance(&mut u, n_t);
        let mut out = vec![u.clone()];
        for _ in 0..n_delta {
            stepper.advance(&mut u, 1);
            out.push(u.clone());
        }
        out
    };
    let sf = &near[0];

    let apply = |u: &[f64]| op.apply(u).expect("grid checked");
    let asf = apply(sf);

    let measured = near
        .iter()
        .step_by((n_delta / 20).max(1))
        .map(|u| {
            let a1 = apply(u);
            let a2 = apply(&a1);
            h_norm(&grid, &a1).max(h_norm(&grid, &a2))
        })
        .fold(0.0, f64::max);
    let ktilde = match p.ktilde {
        KTildeSource::Given(k) => k,
        KTildeSource::Measured => measured,
    };

    let mut entries = Vec::new();

    // (ii)
    entries.push(ObservationEntry::new("ii_energy_window_f", window_excess(&tf.energy, a_f), 0.0, 1e-9));
    entries.push(ObservationEntry::new("ii_energy_window_g", window_excess(&tg.energy, a_g), 0.0, 1e-9));

    // (iii): the bound at the requested δ, then the first-order rate over a decade of
    // δ small enough that δ ‖A² S f‖ stays below 0.1; grid-scale modes of A_h make the
    // quotient error δ-independent above that.
    let r_delta = {
        let q: Vec<f64> = near[n_delta].iter().zip(sf).map(|(a, b)| (a - b) / p.delta).collect();
        h_norm(&grid, &sub_scaled(&q, &asf, 1.0))
    };
    entries.push(ObservationEntry::new("iii_difference_quotient", r_delta, ktilde * p.delta, 0.0));
    let delta_r = if measured > 0.0 { p.delta.min(0.1 / measured) } else { p.delta };
    const FINE_STEPS: usize = 400;
    let fine = Stepper::new(op, delta_r / FINE_STEPS as f64, p.scheme)?;
    let mut ds = Vec::new();
    let mut rs = Vec::new();
    let mut u = sf.to_vec();
    let mut done = 0;
    for i in (0..=4).rev() {
        let steps = ((FINE_STEPS as f64) * 10f64.powf(-(i as f64) / 4.0)).round() as usize;
        fine.advance(&mut u, steps - done);
        done = steps;
        let d = steps as f64 * fine.dt;
        let q: Vec<f64> = u.iter().zip(sf).map(|(a, b)| (a - b) / d).collect();
        ds.push(d);
        rs.push(h_norm(&grid, &sub_scaled(&q, &asf, 1.0)));
    }
    let (slope, intercept) = linear_fit(
        &ds.iter().map(|d| d.ln()).collect::<Vec<_>>(),
        &rs.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect::<Vec<_>>(),
    );
    let residual_constant = ds.iter().zip(&rs).map(|(d, r)| r / d).fold(0.0, f64::max);
    let mut e = ObservationEntry::new("iii_first_order", (slope - 1.0).abs(), 0.2, 0.0);
    e.note = Some(format!(
        "slope {slope:.4} over delta in [{:.3e}, {:.3e}], constant {:.4e}",
        ds[0],
        ds[ds.len() - 1],
        intercept.exp()
    ));
    entries.push(e);

    // (iv): flux of S(s) A S(t) f on [0, T - t - t1].
    let window = p.horizon - p.t - p.t1;
    let in_range = p.t <= p.horizon - p.t1 - p.delta;
    let bound_iv = 3.0 * ktilde * ktilde * p.delta * p.delta + 6.0 * a_f / (p.delta * p.delta);
    let mut e = if window >= p.dt {
        let n_w = (window / p.dt).round() as usize;
        let tr = stepper.run(&asf, n_w, &EvolveOptions::default())?;
        ObservationEntry::new("iv_flux_of_derivative", tr.flux_integral(), bound_iv, 0.0)
    } else {
        ObservationEntry { name: "iv_flux_of_derivative".into(), value: 0.0, bound: bound_iv, holds: true, flagged: true, note: None }
    };
    if !in_range {
        e.flagged = true;
        e.note = Some(format!("t = {} beyond T - t1 - delta; window {window:.4}", p.t));
    }
    entries.push(e);

    // (v)
    let q = dot(&grid, sf, &asf);
    entries.push(ObservationEntry::new(
        "v_near_orthogonal",
        q.abs(),
        4.0 * p.delta * ktilde * ktilde + a_f / (2.0 * p.delta),
        0.0,
    ));
    let scale = dot(&grid, sf, sf) / grid.h.powi(3);
    entries.push(ObservationEntry::new("v_discrete_energy_identity", (q - op.energy_rate(sf)).abs(), 0.0, 1e-12 * scale));

    // (vi)
    let sg = &{
        let mut u = g.clone();
        stepper.advance(&mut u, n_t);
        u
    };
    let ip = dot(&grid, sf, sg);
    let cs = (a_f * a_g).sqrt() * p.horizon.max(1.0);
    entries.push(ObservationEntry::new("vi_preserved_orthogonality", ip.abs(), cs + 1e-6, 0.0));
    let w = crate::norms::trapezoid_weights(n_t + 1, p.dt);
    let cross: f64 = (0..=n_t).map(|j| w[j] * tf.flux[j] * tg.flux[j]).sum();
    let mut e = ObservationEntry::new("vi_flux_identity", (ip - dot(&grid, f0, &g) + cross).abs(), 0.0, 1e-3 * (1.0 + a_f.max(a_g)));
    e.note = Some("continuum identity with trapezoidal flux quadrature".into());
    entries.push(e);
    // Exact per-step identity of the trapezoidal scheme, right-boundary term included.
    if p.scheme == Scheme::Trapezoidal {
        let h = grid.h;
        let mut acc = 0.0;
        for j in 0..n_t {
            let fm = 0.5 * (tf.flux[j] + tf.flux[j + 1]);
            let gm = 0.5 * (tg.flux[j] + tg.flux[j + 1]);
            let rf = 0.5 * (tf.right_trace[j] + tf.right_trace[j + 1]) / h;
            let rg = 0.5 * (tg.right_trace[j] + tg.right_trace[j + 1]) / h;
            acc += p.dt * (fm * gm + rf * rg);
        }
        entries.push(ObservationEntry::new(
            "vi_discrete_identity",
            (ip - dot(&grid, f0, &g) + acc).abs(),
            0.0,
            1e-11 * (1.0 + acc.abs()),
        ));
    }

    // (vii) with V = span{f0}.
    let sg0 = {
        let mut u = g0.to_vec();
        stepper.advance(&mut u, n_t);
        u
    };
    let nf = dot(&grid, sf, sf);
    let lhs = if nf > 0.0 { h_norm(&grid, &sub_scaled(&sg0, sf, dot(&grid, &sg0, sf) / nf)) } else { h_norm(&grid, &sg0) };
    let f_norm2 = dot(&grid, f0, f0);
    let rhs = h_norm(&grid, &sub_scaled(g0, f0, dot(&grid, g0, f0) / f_norm2));
    entries.push(ObservationEntry::new("vii_projection_contraction", lhs, rhs, 1e-10));

    Ok(ObservationReport {
        params: p.clone(),
        ktilde,
        flux_f: a_f,
        flux_g: a_g,
        initial_overlap: overlap,
        residual_slope: slope,
        residual_constant,
        entries,
    })
}
