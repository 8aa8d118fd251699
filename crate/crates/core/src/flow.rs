//! Regularity and smoothing constants of the flow, the covering number of the
//! `H³` ball, and the derived scales `K₀`, `t₁`, `K̃`, `K₁`.

use num_bigint::BigUint;
use num_traits::float::FloatCore;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::mantissa::Mantissa;
use crate::sobolev::SobolevTable;
use crate::xreal::XReal;

/// Largest order with a flow constant.
pub const MAX_FLOW_ORDER: usize = 6;

/// Smallest admissible length.
pub const MIN_LENGTH: f64 = 4.0;

/// Orders whose constants depend on the extension-operator profile.
pub const PROFILE_DEPENDENT_ORDERS: [usize; 4] = [1, 2, 4, 5];

/// `B` is kept as an exact integer while it has at most this many bits.
pub const EXACT_B_BITS: u64 = 4096;

pub fn check_length(length: f64) -> Result<(), CoreError> {
    if length.is_finite() && length >= MIN_LENGTH {
        Ok(())
    } else {
        Err(CoreError::LengthTooSmall(length))
    }
}

/// `F₀^k`, `F₁^k` for `k = 0..=6` and `F_s^k` for `k = 1..=6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct FlowConstantSet<M = f64> {
    pub length: f64,
    pub f0: Vec<XReal<M>>,
    pub f1: Vec<XReal<M>>,
    /// `fs[k - 1]` holds `F_s^k`.
    pub fs: Vec<XReal<M>>,
    pub k0: XReal<M>,
    pub lambda_profile: String,
    pub e13_stubbed: bool,
    pub profile_dependent_orders: Vec<usize>,
}

impl<M: Mantissa> FlowConstantSet<M> {
    pub fn fs(&self, k: usize) -> Result<&XReal<M>, CoreError> {
        if k == 0 || k > MAX_FLOW_ORDER {
            return Err(CoreError::OrderOutOfRange(k));
        }
        Ok(&self.fs[k - 1])
    }

    /// Smoothing bound `F_s^k t^{-k/2}` for `t <= L`, and `F_s^k L^{-k/2}` beyond.
    pub fn smoothing_bound(&self, k: usize, t: f64) -> Result<XReal<M>, CoreError> {
        if t <= 0.0 {
            return Err(CoreError::NonPositive("t"));
        }
        let tt = XReal::<M>::from_f64(t.min(self.length));
        Ok(self.fs(k)? / tt.pow_ratio(k as u64, 2)?)
    }
}

fn x<M: Mantissa>(v: u64) -> XReal<M> {
    XReal::from_u64(v)
}

/// Computes every flow constant at length `L >= 4`.
pub fn f_constants<M: Mantissa>(length: f64, sob: &SobolevTable<M>) -> Result<FlowConstantSet<M>, CoreError> {
    check_length(length)?;
    let l = XReal::<M>::from_f64(length);
    let sqrt_l = l.sqrt()?;
    let s23 = (x::<M>(2) * &l / x(3)).sqrt()?;
    let e13 = sob.e(1, 3)?;
    let e46 = sob.e(4, 6)?;
    let e26 = sob.e(2, 6)?;

    let mut f0 = vec![XReal::zero(); MAX_FLOW_ORDER + 1];
    let mut f1 = vec![XReal::zero(); MAX_FLOW_ORDER + 1];

    f0[0] = XReal::one();
    f1[0] = (x::<M>(5) * &l / x(3)).sqrt()?;

    let a3 = XReal::one() + e13.sqrt()?;
    let b3 = (x::<M>(4) * e13).pow_ratio(3, 4)?;
    f0[3] = x::<M>(2) * &a3 + x::<M>(2) * &b3 + XReal::one();
    f1[3] = x::<M>(2) * &s23 * &a3 + x::<M>(2) * &s23 * &b3 + &sqrt_l;

    let core6 = x::<M>(8) * e46.sqrt()?
        + x::<M>(4) * e26.sqrt()?
        + x::<M>(128) * e46.pow_ratio(3, 2)?
        + x::<M>(8) * e26.pow_ratio(3, 4)?;
    f0[6] = &core6 + XReal::one();
    f1[6] = &s23 * &core6 + &sqrt_l;

    let lam = |m: usize| sob.lambda(m).cloned();
    let g = |m: usize| sob.g(m).cloned();
    // Weighted geometric means between the closed-form orders.
    let a0 = lam(0)? * &f0[0] * g(0)?;
    let b0 = lam(3)? * &f0[3] * g(3)?;
    let a1 = lam(1)? * &f1[0] * g(1)?;
    let b1 = lam(4)? * &f1[3] * g(4)?;
    let c0 = lam(6)? * &f0[6] * g(6)?;
    let c1 = lam(7)? * &f1[6] * g(7)?;
    let mix = |w: &XReal<M>, p: &XReal<M>, q: &XReal<M>, i: u64| -> Result<XReal<M>, CoreError> {
        Ok(w * p.pow_ratio(3 - i, 3)? * q.pow_ratio(i, 3)?)
    };
    f0[1] = mix(&g(1)?, &a0, &b0, 1)?;
    f1[1] = mix(&g(1)?, &a1, &b1, 1)?;
    f0[2] = mix(&g(2)?, &a0, &b0, 2)?;
    f1[2] = mix(&g(2)?, &a1, &b1, 2)?;
    f0[4] = mix(&g(4)?, &b0, &c0, 1)?;
    f1[4] = mix(&g(4)?, &b1, &c1, 1)?;
    f0[5] = mix(&g(5)?, &b0, &c0, 2)?;
    f1[5] = mix(&g(5)?, &b1, &c1, 2)?;

    let mut fs = Vec::with_capacity(MAX_FLOW_ORDER);
    for k in 1..=MAX_FLOW_ORDER {
        let kk = k as u64;
        let mut v = x::<M>(2).powi(k as i64)? * x::<M>(kk).pow_ratio(kk, 2)?;
        for i in 0..k {
            v = v * &f1[i] * &f0[i + 1];
        }
        fs.push(v);
    }
    let k0 = x::<M>(2) * &fs[2];

    Ok(FlowConstantSet {
        length,
        f0,
        f1,
        fs,
        k0,
        lambda_profile: sob.profile().name(),
        e13_stubbed: sob.is_stubbed(),
        profile_dependent_orders: PROFILE_DEPENDENT_ORDERS.to_vec(),
    })
}

/// A positive integer that is either known exactly or only through an upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
#[serde(rename_all = "snake_case")]
pub enum Count<M = f64> {
    /// Decimal digits.
    Exact(String),
    UpperBound(XReal<M>),
}

impl<M: Mantissa> Count<M> {
    pub fn exact(&self) -> Option<BigUint> {
        match self {
            Count::Exact(s) => s.parse().ok(),
            Count::UpperBound(_) => None,
        }
    }

    pub fn to_xreal(&self) -> XReal<M> {
        match self {
            Count::Exact(s) => big_to_xreal(&s.parse().expect("decimal digits")),
            Count::UpperBound(v) => v.clone(),
        }
    }

    /// The value as `u64` when exact and small enough.
    pub fn as_u64(&self) -> Option<u64> {
        self.exact().and_then(|b| b.to_u64())
    }
}

/// Integer to `XReal`, exact below `2^53` and correct to one rounding above.
pub fn big_to_xreal<M: Mantissa>(b: &BigUint) -> XReal<M> {
    let bits = b.bits();
    if bits <= 64 {
        return XReal::from_u64(b.to_u64().expect("fits"));
    }
    let shift = bits - 64;
    let top = (b >> shift).to_u64().expect("fits");
    XReal::from_u64(top) * XReal::from_u64(2).powi(shift as i64).expect("positive base")
}

/// Net size data of the `H³` ball of radius `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct CoveringParams<M = f64> {
    pub length: f64,
    pub k: XReal<M>,
    pub m_c: Count<M>,
    pub n_c: Count<M>,
    pub b: Count<M>,
    /// `ln B = (N_c - 1) ln(2 M_c + 1)`.
    pub log_b: XReal<M>,
    pub k1: XReal<M>,
}

fn f64_ratio(v: f64) -> (BigUint, BigUint) {
    let (mant, exp, sign) = FloatCore::integer_decode(v);
    debug_assert!(sign > 0);
    let m = BigUint::from(mant);
    if exp >= 0 {
        (m << exp as u64, BigUint::one())
    } else {
        (m, BigUint::one() << (-exp) as u64)
    }
}

/// Smallest integer `c` with `c² den >= num`.
fn ceil_sqrt_ratio(num: &BigUint, den: &BigUint) -> BigUint {
    let mut c = (num / den).sqrt();
    while &c * &c * den < *num {
        c += 1u32;
    }
    c
}

/// Smallest `f64` not below `v`.
fn f64_upper<M: Mantissa>(v: &XReal<M>) -> Option<f64> {
    let f = v.to_f64();
    if !f.is_finite() || f <= 0.0 {
        return None;
    }
    let up = if XReal::<M>::from_f64(f) >= *v { f } else { f.next_up() };
    up.is_finite().then_some(up)
}

/// `E¹₃` as an exact integer when it is one.
fn exact_integer<M: Mantissa>(v: &XReal<M>) -> Option<u64> {
    let f = v.to_f64();
    (v.depth() == 0 && (1.0..9.0e15).contains(&f) && f.fract() == 0.0 && XReal::<M>::from_f64(f) == *v)
        .then_some(f as u64)
}

/// Covering parameters `M_c`, `N_c`, `B = (2M_c+1)^{N_c-1}` and `K₁ = B^{1/2} K`.
///
/// Ceilings are exact whenever `K` fits in an `f64` (rounded up if needed) and
/// `E¹₃` is an integer; otherwise an inflated `XReal` bound is used.
pub fn covering<M: Mantissa>(length: f64, k: &XReal<M>, sob: &SobolevTable<M>) -> Result<CoveringParams<M>, CoreError> {
    check_length(length)?;
    if *k < XReal::one() {
        return Err(CoreError::BelowMinimum { name: "K", value: k.to_string(), min: "1".into() });
    }
    let e13 = sob.e(1, 3)?;
    let (m_c, n_c) = match (f64_upper(k), exact_integer(e13)) {
        (Some(kf), Some(e)) => {
            let (kn, kd) = f64_ratio(kf);
            let (ln, ld) = f64_ratio(length);
            let sq = &kn * &kn * &ln * &ln * BigUint::from(e);
            let den = &kd * &kd * &ld * &ld;
            let m_c = ceil_sqrt_ratio(&sq, &(&den * 6u32));
            let n_c = ceil_sqrt_ratio(&(&sq * 4u32), &den);
            (Count::Exact(m_c.to_string()), Count::Exact(n_c.to_string()))
        }
        _ => {
            let inflate = XReal::<M>::one() + XReal::from_f64(1e-12);
            let kl = k * XReal::from_f64(length);
            let m = &kl * (e13 / XReal::from_u64(6)).sqrt()? * &inflate + XReal::one();
            let n = XReal::<M>::from_u64(2) * &kl * e13.sqrt()? * &inflate + XReal::one();
            (Count::UpperBound(m), Count::UpperBound(n))
        }
    };
    let (b, log_b) = match (m_c.exact(), n_c.exact()) {
        (Some(m), Some(n)) => {
            let base = m * 2u32 + 1u32;
            let expo = n - 1u32;
            let base_x = big_to_xreal::<M>(&base);
            let log_b = big_to_xreal::<M>(&expo) * base_x.ln()?;
            let bits_est = expo.to_f64().unwrap_or(f64::INFINITY) * (base.bits() as f64);
            let b = if bits_est <= EXACT_B_BITS as f64 {
                let mut acc = BigUint::one();
                let mut i = BigUint::zero();
                while i < expo {
                    acc *= &base;
                    i += 1u32;
                }
                Count::Exact(acc.to_string())
            } else {
                Count::UpperBound(log_b.exp())
            };
            (b, log_b)
        }
        _ => {
            let base = XReal::<M>::from_u64(2) * m_c.to_xreal() + XReal::one();
            let expo = n_c.to_xreal() - XReal::one();
            let log_b = expo * base.ln()?;
            (Count::UpperBound(log_b.exp()), log_b)
        }
    };
    let k1 = (&log_b * XReal::ratio(1, 2)).exp() * k;
    Ok(CoveringParams { length, k: k.clone(), m_c, n_c, b, log_b, k1 })
}

/// Scales derived from the flow constants at radius `K >= K₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "XReal<M>: Serialize", deserialize = "XReal<M>: Deserialize<'de>"))]
pub struct Scales<M = f64> {
    pub t1: XReal<M>,
    pub k0: XReal<M>,
    pub ktilde: XReal<M>,
    pub k1: XReal<M>,
}

pub fn t1<M: Mantissa>(k: &XReal<M>, fc: &FlowConstantSet<M>) -> Result<XReal<M>, CoreError> {
    Ok((XReal::<M>::from_u64(2) * fc.fs(3)? / k).pow_ratio(2, 3)?)
}

pub fn ktilde<M: Mantissa>(k: &XReal<M>, fc: &FlowConstantSet<M>, sob: &SobolevTable<M>) -> Result<XReal<M>, CoreError> {
    let fs3 = fc.fs(3)?;
    let fs6 = fc.fs(6)?;
    let first = k * k * fs6 * (XReal::one() + XReal::<M>::from_u64(2) * sob.e(4, 6)?.sqrt()?)
        / (XReal::<M>::from_u64(4) * fs3 * fs3);
    let second = k * sob.e(2, 3)?.sqrt()? / XReal::from_u64(2);
    Ok(first + second)
}

pub fn scales<M: Mantissa>(
    length: f64,
    k: &XReal<M>,
    fc: &FlowConstantSet<M>,
    sob: &SobolevTable<M>,
) -> Result<Scales<M>, CoreError> {
    if *k < fc.k0 {
        return Err(CoreError::RadiusBelowThreshold { k: k.to_string(), k0: fc.k0.to_string() });
    }
    let cov = covering(length, k, sob)?;
    Ok(Scales { t1: t1(k, fc)?, k0: fc.k0.clone(), ktilde: ktilde(k, fc, sob)?, k1: cov.k1 })
}
