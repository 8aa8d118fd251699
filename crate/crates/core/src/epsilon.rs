//! Flux threshold `ε₀(L, γ, K)`, observation time `T₀`, the full constant chain,
//! and the closed-form constant for short intervals.
//!
//! The threshold comes from a backward recursion
//! `D̃_n = (D̃_{n+1} / q_n)²` started from the largest `D̃_B` allowed by the
//! stopping rule, with `q_0 = 48K̃/γ²`, `q_1 = 1536K̃/γ²` and
//! `q_n = 96(n+1)K̃/γ²` for `n >= 2`. In logarithms,
//! `ln ε₀ = 2^B ln D̃_B - Σ_{n<B} 2^{n+1} ln q_n`.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::critical::{classify, default_tolerance, CriticalReport};
use crate::error::CoreError;
use crate::flow::{self, check_length, Count, CoveringParams, FlowConstantSet};
use crate::gamma::{compute_gamma, GammaCertificate};
use crate::margin::{Margin, EPS_F64};
use crate::sobolev::{LambdaProfile, SobolevTable};
use crate::xreal::XReal;

pub const DEFAULT_EXACT_THRESHOLD: u64 = 100_000;
/// Number of top terms summed exactly in the asymptotic bracket.
pub const DEFAULT_BRACKET_TERMS: u32 = 64;
/// Trace entries kept for the smallest indices.
pub const TRACE_CAP: u64 = 256;

fn n(v: u64) -> XReal {
    XReal::from_u64(v)
}

/// Next flux budget from the current one.
///
/// `n = 0` produces `C₁` from `C₀ = ε`, `n = 1` produces `C₂`, and `n >= 2`
/// produces `C_{n+1}`. Only `δ > 0` is required here; see [`c_next_checked`].
pub fn c_next(idx: u64, c_n: &XReal, delta: &XReal, gamma: &XReal, ktilde: &XReal) -> Result<XReal, CoreError> {
    if !delta.is_positive() {
        return Err(CoreError::DeltaOutOfRange { delta: delta.to_string(), upper: "inf".into() });
    }
    if !gamma.is_positive() {
        return Err(CoreError::NonPositive("gamma"));
    }
    let d2 = delta.powi(2)?;
    let k2 = ktilde.powi(2)?;
    let pre = (n(2) / gamma).powi(2)?;
    Ok(match idx {
        0 => n(24) / gamma.powi(2)? * (&d2 * &k2 + c_n / &d2),
        1 => pre * (n(24) * &d2 * &k2 + n(192) * c_n / &d2 + n(16) * &k2 * c_n),
        _ => pre * n(idx + 1) * (n(6) * &k2 * &d2 + n(12) * c_n / &d2 + n(4) * &k2 * c_n),
    })
}

/// [`c_next`] with the admissible range `0 < δ < min(1/2, t₁)` enforced.
pub fn c_next_checked(
    idx: u64,
    c_n: &XReal,
    delta: &XReal,
    gamma: &XReal,
    ktilde: &XReal,
    t1: &XReal,
) -> Result<XReal, CoreError> {
    let upper = XReal::ratio(1, 2).min(t1.clone());
    if !delta.is_positive() || *delta >= upper {
        return Err(CoreError::DeltaOutOfRange { delta: delta.to_string(), upper: upper.to_string() });
    }
    c_next(idx, c_n, delta, gamma, ktilde)
}

/// Multipliers of the backward recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Standard,
    /// Every `q_n = 1`; isolates the squaring structure in tests.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonParams {
    pub exact_threshold: u64,
    /// Replaces the covering number. Meant for tests only.
    pub b_override: Option<u64>,
    pub coefficients: Coefficients,
    pub bracket_terms: u32,
}

impl Default for EpsilonParams {
    fn default() -> Self {
        EpsilonParams {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            b_override: None,
            coefficients: Coefficients::Standard,
            bracket_terms: DEFAULT_BRACKET_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub n: u64,
    /// `δ_{n+1} = (D̃_n / K̃²)^{1/4}`.
    pub delta_next: XReal,
    pub d_tilde: XReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RecursionTrace {
    pub steps: Vec<TraceStep>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub length: f64,
    pub k: XReal,
    pub gamma: XReal,
    pub b: Count,
    pub b_overridden: bool,
    pub ktilde: XReal,
    pub t1: XReal,
    pub d_tilde_b: XReal,
    /// `ln ε₀`.
    pub log_eps0: XReal,
    /// Independent evaluation of the product formula (exact mode only).
    pub closed_form_log_eps0: Option<XReal>,
    pub bracket: (XReal, XReal),
    /// `ln(-ln ε₀)`.
    pub headline_log_neg_log_eps0: XReal,
    pub t0: XReal,
    pub mode: Mode,
    /// Stopping rule `(3/2)√((B+1) D̃_B / t₁) < γ/√B`.
    pub dn_check: Margin,
    /// `1/(2B) - D̃_B`.
    pub budget_cap_slack: XReal,
    pub coefficients: Coefficients,
}

/// `ln q_n`.
fn ln_q(idx: &XReal, base: &XReal, coeff: Coefficients) -> Result<XReal, CoreError> {
    if coeff == Coefficients::Unit {
        return Ok(XReal::zero());
    }
    let c = match idx.to_f64() {
        0.0 => n(48) * base,
        1.0 => n(1536) * base,
        _ => n(96) * (idx + XReal::one()) * base,
    };
    Ok(c.ln()?)
}

/// Largest `D̃_B` meeting the stopping rule with margin `0.99²`.
pub fn d_tilde_b(b: &XReal, t1: &XReal, gamma: &XReal) -> XReal {
    XReal::ratio(99 * 99, 100 * 100) * XReal::ratio(4, 9) * t1 * gamma.powi(2).expect("finite") / (b * (b + XReal::one()))
}

fn dn_check(b: &XReal, d_b: &XReal, t1: &XReal, gamma: &XReal) -> Result<Margin, CoreError> {
    let lhs = XReal::ratio(3, 2) * ((b + XReal::one()) * d_b / t1).sqrt()?;
    Margin::new(&lhs, &(gamma / b.sqrt()?), EPS_F64)
}

/// Backward recursion from `D̃_B`, one step at a time.
pub fn backward_iteration(
    b: u64,
    ln_d_b: &XReal,
    ktilde: &XReal,
    gamma: &XReal,
    coeff: Coefficients,
    cancel: Option<&AtomicBool>,
) -> Result<(XReal, RecursionTrace), CoreError> {
    let base = ktilde / gamma.powi(2)?;
    let ln_k2 = ktilde.powi(2)?.ln()?;
    let quarter = XReal::ratio(1, 4);
    let mut ln_d = ln_d_b.clone();
    let mut steps = Vec::new();
    let record = |i: u64, ln_d: &XReal, steps: &mut Vec<TraceStep>| {
        if i < TRACE_CAP || i == b {
            steps.push(TraceStep {
                n: i,
                delta_next: ((ln_d - &ln_k2) * &quarter).exp(),
                d_tilde: ln_d.exp(),
            });
        }
    };
    record(b, &ln_d, &mut steps);
    for i in (0..b).rev() {
        if i % 4096 == 0 && cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(CoreError::Cancelled);
        }
        ln_d = n(2) * (&ln_d - ln_q(&n(i), &base, coeff)?);
        record(i, &ln_d, &mut steps);
    }
    steps.reverse();
    Ok((ln_d, RecursionTrace { steps, truncated: b >= TRACE_CAP }))
}

/// `2^B ln D̃_B - Σ_{n=0}^{B-1} 2^{n+1} ln q_n` summed term by term.
pub fn closed_form(b: u64, ln_d_b: &XReal, ktilde: &XReal, gamma: &XReal, coeff: Coefficients) -> Result<XReal, CoreError> {
    let base = ktilde / gamma.powi(2)?;
    let two = n(2);
    let mut sum = XReal::zero();
    for i in 0..b {
        sum = sum + two.powi(i as i64 + 1)? * ln_q(&n(i), &base, coeff)?;
    }
    Ok(two.powi(b as i64)? * ln_d_b - sum)
}

/// Bounds on `ln ε₀` for a huge `B`.
///
/// The sum `S = Σ_{k=2}^{B-1} 2^{k+1} ln(k+1)` is taken exactly over its top
/// `J` terms, and the rest is bounded by `2^{B-J+1} ln(B-J)`, so the bracket
/// has relative width about `2^{-J}` plus a rounding allowance.
pub fn asymptotic_bracket(
    b: &XReal,
    ln_d_b: &XReal,
    ktilde: &XReal,
    gamma: &XReal,
    terms: u32,
    coeff: Coefficients,
) -> Result<(XReal, XReal), CoreError> {
    let ln2 = n(2).ln()?;
    let pow2 = |e: &XReal| (e * &ln2).exp();
    let two_b = pow2(b);
    if coeff == Coefficients::Unit {
        let v = two_b * ln_d_b;
        return Ok((v.clone(), v));
    }
    let two_b1 = pow2(&(b + XReal::one()));
    let base = ktilde / gamma.powi(2)?;
    let fixed = two_b * ln_d_b
        - (&two_b1 - n(8)) * (n(96) * &base).ln()?
        - n(4) * (n(1536) * &base).ln()?
        - n(2) * (n(48) * &base).ln()?;
    // Terms k = B - j for j = 1..=J, stopping at k = 2.
    let max_j = (b - n(2)).min(n(terms as u64)).to_f64().floor().max(0.0) as u64;
    let mut head = XReal::zero();
    for j in 1..=max_j {
        let w = n(2).powi(j as i64)?.recip();
        head = head + w * (b - n(j) + XReal::one()).ln()?;
    }
    let rest_top = b - n(max_j);
    let tail = if rest_top > n(2) {
        n(2).powi(max_j as i64)?.recip() * rest_top.ln()?
    } else {
        XReal::zero()
    };
    let s_lower = &two_b1 * &head;
    let s_upper = &two_b1 * (head + tail);
    // Rounding allowance so the bracket also covers the floating evaluation.
    let pad = (fixed.abs() + &s_upper) * XReal::from_f64(EPS_F64);
    Ok((&fixed - s_upper - &pad, fixed - s_lower + pad))
}

/// Computes `ε₀` in exact mode when `B <= exact_threshold`, otherwise brackets it.
#[allow(clippy::too_many_arguments)]
pub fn epsilon0(
    length: f64,
    k: &XReal,
    gamma: &XReal,
    fc: &FlowConstantSet,
    sob: &SobolevTable,
    cov: &CoveringParams,
    params: &EpsilonParams,
    cancel: Option<&AtomicBool>,
) -> Result<(EpsilonReport, RecursionTrace), CoreError> {
    check_length(length)?;
    if *k < fc.k0 {
        return Err(CoreError::RadiusBelowThreshold { k: k.to_string(), k0: fc.k0.to_string() });
    }
    if !gamma.is_positive() {
        return Err(CoreError::NonPositive("gamma"));
    }
    let t1 = flow::t1(k, fc)?;
    let ktilde = flow::ktilde(k, fc, sob)?;
    let (b_count, b_exact) = match params.b_override {
        Some(b) => (Count::Exact(b.to_string()), Some(b)),
        None => (cov.b.clone(), cov.b.as_u64()),
    };
    if b_exact == Some(0) {
        return Err(CoreError::NonPositive("B"));
    }
    let b = match b_exact {
        Some(v) => n(v),
        None => match &cov.b {
            Count::Exact(_) => cov.b.to_xreal(),
            Count::UpperBound(_) => cov.log_b.exp(),
        },
    };
    let d_b = d_tilde_b(&b, &t1, gamma);
    let ln_d_b = d_b.ln()?;

    let (mode, log_eps0, closed, bracket, trace) = match b_exact {
        Some(bv) if bv <= params.exact_threshold => {
            let (v, trace) = backward_iteration(bv, &ln_d_b, &ktilde, gamma, params.coefficients, cancel)?;
            let c = closed_form(bv, &ln_d_b, &ktilde, gamma, params.coefficients)?;
            (Mode::Exact, v.clone(), Some(c), (v.clone(), v), trace)
        }
        _ => {
            let (lo, hi) = asymptotic_bracket(&b, &ln_d_b, &ktilde, gamma, params.bracket_terms, params.coefficients)?;
            let trace = RecursionTrace {
                steps: vec![],
                truncated: true,
            };
            // Report the conservative end: the smaller ε₀.
            (Mode::Asymptotic, lo.clone(), None, (lo, hi), trace)
        }
    };
    let headline_log_neg_log_eps0 = (-&log_eps0).ln()?;
    let t0 = (n(3) * &b - XReal::one()) * &t1;
    let report = EpsilonReport {
        length,
        k: k.clone(),
        gamma: gamma.clone(),
        b: b_count,
        b_overridden: params.b_override.is_some(),
        ktilde,
        dn_check: dn_check(&b, &d_b, &t1, gamma)?,
        budget_cap_slack: (n(2) * &b).recip() - &d_b,
        t1,
        d_tilde_b: d_b,
        log_eps0,
        closed_form_log_eps0: closed,
        bracket,
        headline_log_neg_log_eps0,
        t0,
        mode,
        coefficients: params.coefficients,
    };
    Ok((report, trace))
}

/// Every intermediate of the constant chain at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub length: f64,
    pub lambda_profile: String,
    pub critical: CriticalReport,
    pub flow: FlowConstantSet,
    pub covering: CoveringParams,
    pub k1_bar: XReal,
    pub gamma: GammaCertificate,
    pub epsilon: EpsilonReport,
    pub trace: RecursionTrace,
    /// The observability constant `c(L) = ε₀`.
    pub c: XReal,
}

/// Runs Sobolev → flow → covering at `K = K₀` → `γ(L, K̄₁)` → `ε₀`.
pub fn theorem_constant(
    length: f64,
    profile: &LambdaProfile,
    params: &EpsilonParams,
    cancel: Option<&AtomicBool>,
) -> Result<ChainReport, CoreError> {
    check_length(length)?;
    let crit = classify(length, default_tolerance(length));
    if crit.is_critical {
        return Err(CoreError::CriticalLength { length, witness: crit.witness, distance: crit.d.to_f64() });
    }
    let sob = SobolevTable::new(profile.clone());
    let fc = flow::f_constants(length, &sob)?;
    let k = fc.k0.clone();
    let cov = flow::covering(length, &k, &sob)?;
    let gamma = compute_gamma(length, &cov.k1, &crit.d, &sob)?;
    let (eps, trace) = epsilon0(length, &k, &gamma.gamma, &fc, &sob, &cov, params, cancel)?;
    let c = eps.log_eps0.exp();
    Ok(ChainReport {
        length,
        lambda_profile: profile.name(),
        critical: crit,
        k1_bar: cov.k1.clone(),
        flow: fc,
        covering: cov,
        gamma,
        epsilon: eps,
        trace,
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallLength {
    pub length: f64,
    pub time: f64,
    /// Lower bound `c_A` with `∫ flux² >= c_A ‖y₀‖²`.
    pub c_a: f64,
    /// Control cost factor `1 / c_A`.
    pub cost_factor: f64,
    /// `1 - L³/(3Tπ²) - L²/(3π²)`, positive on the validity domain.
    pub margin: f64,
}

pub fn small_length_report(length: f64, time: f64) -> Result<SmallLength, CoreError> {
    if length <= 0.0 {
        return Err(CoreError::NonPositive("L"));
    }
    if time <= 0.0 {
        return Err(CoreError::NonPositive("T"));
    }
    let pi2 = std::f64::consts::PI.powi(2);
    let margin = 1.0 - length.powi(3) / (3.0 * time * pi2) - length.powi(2) / (3.0 * pi2);
    if margin <= 0.0 {
        return Err(CoreError::ConditionViolated { margin });
    }
    let c_a = (3.0 * time * pi2 - time * length.powi(2) - length.powi(3)) / (3.0 * time * pi2);
    Ok(SmallLength { length, time, c_a, cost_factor: 1.0 / c_a, margin })
}

/// `c_A(L, T) = (3Tπ² - TL² - L³) / (3Tπ²)`.
pub fn small_length_constant(length: f64, time: f64) -> Result<f64, CoreError> {
    Ok(small_length_report(length, time)?.c_a)
}
