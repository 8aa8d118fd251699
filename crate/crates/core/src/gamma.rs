//! The radius `γ(L, K₁)` below which no normalized `H³` function of norm at most
//! `K₁` can be an approximate eigenfunction of the KdV operator with small flux.
//!
//! The bound comes from a contradiction argument on such a function `u` with
//! approximate eigenvalue `λ` (`p = iλ`): its Fourier–Laplace transform is an
//! entire function whose zeros must match those of `p - iξ + iξ³` inside a disc of
//! radius `R`. With `α = u''(0)`, `β = u''(L)`, `δ = u'(0)` the argument needs
//! `|α| + |β| >= α*`, a root perturbation radius `r` separated from the critical
//! spectrum by `d(L)`, and the six inequalities on `γ` checked below. Each one is
//! linear or quadratic in `γ` and is solved in closed form.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::flow::check_length;
use crate::mantissa::{Hp, Mantissa};
use crate::margin::Margin;
use crate::sobolev::{LambdaProfile, SobolevTable};
use crate::xreal::XReal;

/// Multiplicative margin applied to `r` and `γ`.
pub const SAFETY: (u64, u64) = (99, 100);

pub const BOUND_NAMES: [&str; 6] = [
    "a_quadratic_normalization",
    "b_alpha_sixth",
    "c_boundary_decay",
    "d_contour_lower_bound",
    "e_rouche_comparison",
    "f_imaginary_part",
];

pub const R_RANGE_NAMES: [&str; 2] = ["r_below_pi_over_8l", "r_spectral_separation"];

pub use crate::margin::{Status, EPS_F64, EPS_HP};

/// One inequality `lhs < rhs` (or `<=`) with its slack `rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct NamedBound<M = f64> {
    pub name: String,
    pub lhs: XReal<M>,
    pub rhs: XReal<M>,
    pub slack: XReal<M>,
    /// `ln rhs - ln lhs`.
    pub log_margin: XReal<M>,
    /// Rounding uncertainty of `log_margin`.
    pub resolution: f64,
    pub strict: bool,
    pub status: Status,
}

impl<M: Mantissa> NamedBound<M> {
    fn new(name: &str, lhs: XReal<M>, rhs: XReal<M>, strict: bool, eps: f64) -> Result<Self, CoreError> {
        let Margin { slack, log_margin, resolution, mut status } = Margin::new(&lhs, &rhs, eps)?;
        // Equality satisfies a non-strict bound.
        if !strict && status == Status::Fail && log_margin.is_zero() {
            status = Status::Pass;
        }
        Ok(NamedBound { name: name.to_string(), lhs, rhs, slack, log_margin, resolution, strict, status })
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct GammaCertificate<M = f64> {
    pub length: f64,
    pub k1: XReal<M>,
    pub e13: XReal<M>,
    pub k2: XReal<M>,
    pub r_disc: XReal<M>,
    pub alpha_star: XReal<M>,
    pub d_l: XReal<M>,
    pub r: XReal<M>,
    /// Upper bound on `γ` extracted from each inequality, in [`BOUND_NAMES`] order.
    pub gamma_bounds: Vec<XReal<M>>,
    pub gamma: XReal<M>,
    pub bounds: Vec<NamedBound<M>>,
    pub safety_factor: f64,
    pub lambda_profile: String,
}

/// Quantities shared by construction and verification.
struct Core<M> {
    l: XReal<M>,
    k2: XReal<M>,
    r_disc: XReal<M>,
    alpha: XReal<M>,
    e_lr: XReal<M>,
    e_3lr: XReal<M>,
    sqrt_l: XReal<M>,
    sqrt_l3_3: XReal<M>,
}

fn core<M: Mantissa>(length: f64, k1: &XReal<M>, e13: &XReal<M>) -> Result<Core<M>, CoreError> {
    let one = XReal::<M>::one();
    let n = |v: u64| XReal::<M>::from_u64(v);
    let l = XReal::<M>::from_f64(length);
    let k2 = &one + (&one + e13.sqrt()?) * k1;
    let r_disc = (&one + n(3) * &k2 / n(2)).pow_ratio(1, 3)?;
    let lr = &l * &r_disc;
    let e_lr = lr.exp();
    let e_3lr = (n(3) * &lr).exp();
    let e_6lr = (n(6) * &lr).exp();
    let alpha = (n(81) * e_6lr / (n(169) * r_disc.powi(5)?) + XReal::ratio(54, 245))
        .powf(&-XReal::ratio(1, 2))?;
    let sqrt_l = l.sqrt()?;
    let sqrt_l3_3 = (l.powi(3)? / n(3)).sqrt()?;
    Ok(Core { l, k2, r_disc, alpha, e_lr, e_3lr, sqrt_l, sqrt_l3_3 })
}

// Coefficient multiplying γ² in bound (a).
fn quad_coef<M: Mantissa>(c: &Core<M>) -> Result<XReal<M>, CoreError> {
    let n = |v: u64| XReal::<M>::from_u64(v);
    let r = &c.r_disc;
    let inner = n(27) / (n(52) * r.powi(2)?) + n(9) * &c.sqrt_l * &c.e_3lr / (n(52) * r.powi(3)?);
    Ok(n(8) * r * inner.powi(2)? + XReal::ratio(171, 196))
}

fn two_pi_minus_one<M: Mantissa>() -> XReal<M> {
    XReal::<M>::from_u64(2) * XReal::pi() - XReal::one()
}

fn ln_four_thirds<M: Mantissa>() -> Result<XReal<M>, CoreError> {
    Ok(XReal::<M>::ratio(4, 3).ln()?)
}

fn all_bounds<M: Mantissa>(
    c: &Core<M>,
    d_l: &XReal<M>,
    r: &XReal<M>,
    gamma: &XReal<M>,
    eps: f64,
) -> Result<Vec<NamedBound<M>>, CoreError> {
    let n = |v: u64| XReal::<M>::from_u64(v);
    let l = &c.l;
    let a = &c.alpha;
    let rs = &c.r_disc + &c.sqrt_l * &c.e_lr;
    let bdry = XReal::one() + &c.sqrt_l3_3 * &c.e_lr;
    let e_term = n(96) * &c.e_lr * &rs / (a * l * r) + &bdry / (a * l);
    Ok(vec![
        NamedBound::new(BOUND_NAMES[0], quad_coef(c)? * gamma.powi(2)?, two_pi_minus_one(), false, eps)?,
        NamedBound::new(BOUND_NAMES[1], gamma * &rs, a / n(6), false, eps)?,
        NamedBound::new(BOUND_NAMES[2], gamma * &bdry, a * l / n(3) / &c.e_lr, true, eps)?,
        NamedBound::new(BOUND_NAMES[3], gamma * &rs, a * l * r / n(288), false, eps)?,
        NamedBound::new(BOUND_NAMES[4], n(288) * gamma * e_term, XReal::one(), true, eps)?,
        NamedBound::new(BOUND_NAMES[5], n(3) * gamma * l, ln_four_thirds()?, false, eps)?,
        NamedBound::new(R_RANGE_NAMES[0], r.clone(), XReal::pi() / (n(8) * l), true, eps)?,
        NamedBound::new(
            R_RANGE_NAMES[1],
            n(56) * l.powi(2)? * (&c.r_disc + XReal::one()) * r,
            d_l.clone(),
            true,
            eps,
        )?,
    ])
}

/// Builds the certificate for `L >= 4`, `K₁ >= 1` and spectral gap `d(L) > 0`.
pub fn compute_gamma<M: Mantissa>(
    length: f64,
    k1: &XReal<M>,
    d_l: &XReal<M>,
    sob: &SobolevTable<M>,
) -> Result<GammaCertificate<M>, CoreError> {
    check_length(length)?;
    if !d_l.is_positive() {
        return Err(CoreError::CriticalLength { length, witness: None, distance: d_l.to_f64() });
    }
    if *k1 < XReal::one() {
        return Err(CoreError::BelowMinimum { name: "K1", value: k1.to_string(), min: "1".into() });
    }
    let e13 = sob.e(1, 3)?.clone();
    let c = core(length, k1, &e13)?;
    let n = |v: u64| XReal::<M>::from_u64(v);
    let safety = XReal::<M>::ratio(SAFETY.0, SAFETY.1);
    let l = &c.l;

    let r = &safety * (XReal::pi() / (n(8) * l)).min(d_l / (n(56) * l.powi(2)? * (&c.r_disc + XReal::one())));

    let a = &c.alpha;
    let rs = &c.r_disc + &c.sqrt_l * &c.e_lr;
    let bdry = XReal::one() + &c.sqrt_l3_3 * &c.e_lr;
    let gamma_bounds = vec![
        (two_pi_minus_one::<M>() / quad_coef(&c)?).sqrt()?,
        a / (n(6) * &rs),
        a * l / n(3) / &c.e_lr / &bdry,
        a * l * &r / (n(288) * &rs),
        (n(288) * (n(96) * &c.e_lr * &rs / (a * l * &r) + &bdry / (a * l))).recip(),
        ln_four_thirds::<M>()? / (n(3) * l),
    ];
    let min = gamma_bounds.iter().cloned().reduce(|x, y| x.min(y)).expect("six bounds");
    let gamma = &safety * min;
    let bounds = all_bounds(&c, d_l, &r, &gamma, EPS_F64)?;

    Ok(GammaCertificate {
        length,
        k1: k1.clone(),
        e13,
        k2: c.k2,
        r_disc: c.r_disc,
        alpha_star: c.alpha,
        d_l: d_l.clone(),
        r,
        gamma_bounds,
        gamma,
        bounds,
        safety_factor: SAFETY.0 as f64 / SAFETY.1 as f64,
        lambda_profile: sob.profile().name(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub lhs: XReal,
    pub rhs: XReal,
    pub slack: XReal,
    pub log_margin: XReal,
    pub resolution: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// True iff every inequality passes.
    pub ok: bool,
    pub working_bits: usize,
    pub checks: Vec<CheckResult>,
}

impl Verification {
    pub fn failed(&self) -> Vec<&str> {
        self.with_status(Status::Fail)
    }

    pub fn unresolved(&self) -> Vec<&str> {
        self.with_status(Status::Unresolved)
    }

    fn with_status(&self, s: Status) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == s).map(|c| c.name.as_str()).collect()
    }
}

/// Re-evaluates every inequality of a certificate from its inputs, `r` and `γ`
/// at 128-bit precision.
pub fn verify_certificate(cert: &GammaCertificate) -> Verification {
    let run = || -> Result<Vec<NamedBound<Hp>>, CoreError> {
        let k1 = cert.k1.convert::<Hp>();
        let sob = SobolevTable::<Hp>::new(LambdaProfile::Default);
        let c = core(cert.length, &k1, sob.e(1, 3)?)?;
        all_bounds(&c, &cert.d_l.convert(), &cert.r.convert(), &cert.gamma.convert(), EPS_HP)
    };
    let checks: Vec<CheckResult> = match run() {
        Ok(bounds) => bounds
            .iter()
            .map(|b| CheckResult {
                name: b.name.clone(),
                lhs: b.lhs.convert(),
                rhs: b.rhs.convert(),
                slack: b.slack.convert(),
                log_margin: b.log_margin.convert(),
                resolution: b.resolution,
                status: b.status,
            })
            .collect(),
        Err(e) => vec![CheckResult {
            name: format!("evaluation: {e}"),
            lhs: XReal::zero(),
            rhs: XReal::zero(),
            slack: XReal::zero(),
            log_margin: XReal::zero(),
            resolution: f64::INFINITY,
            status: Status::Fail,
        }],
    };
    Verification { ok: checks.iter().all(|c| c.status == Status::Pass), working_bits: crate::HP_BITS, checks }
}
