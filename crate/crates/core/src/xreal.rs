//! Extended-range real numbers.
//!
//! An [`XReal`] stores a sign, a tower depth `d`, a flag telling whether the
//! magnitude is below one, and a mantissa `m`:
//!
//! * depth 0: `|x| = m`
//! * depth `d >= 1`: `ln|x| = ±E_{d-1}(m)` where `E_0(m) = m`, `E_k(m) = exp(E_{k-1}(m))`,
//!   with the minus sign iff the value is tiny.
//!
//! Normal form keeps `1e-15 <= m <= 1e15` at depth 0 and `ln(1e15) < m <= 1e15`
//! above it, so `ln` and `exp` are level shifts and products are sums of logs.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::mantissa::Mantissa;

/// Largest mantissa kept at a given depth.
pub const NORMAL_MAX: f64 = 1e15;
/// Smallest depth-0 magnitude.
pub const NORMAL_MIN: f64 = 1e-15;
const LN_NORMAL_MAX: f64 = 34.538_776_394_910_684;
// Beyond this, exp of a negative mantissa argument is below any working precision.
const DIRECT_EXP_LIMIT: f64 = 700.0;
// Relative contributions below e^-200 are invisible to every mantissa backend.
const NEGLIGIBLE_LOG_RATIO: f64 = -200.0;
const MAX_DEPTH: u8 = 32;
const POWI_BY_SQUARING: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum XRealError {
    #[error("logarithm of a non-positive value")]
    LogNonPositive,
    #[error("fractional power of a negative value")]
    NegativeBase,
    #[error("zero raised to a negative power")]
    ZeroToNegative,
    #[error("malformed XReal encoding: {0}")]
    Malformed(String),
}

/// Sign plus nested-logarithm magnitude.
#[derive(Clone, PartialEq)]
pub struct XReal<M = f64> {
    sign: i8,
    depth: u8,
    tiny: bool,
    mant: M,
}

impl<M: Mantissa> XReal<M> {
    pub fn zero() -> Self {
        XReal { sign: 0, depth: 0, tiny: false, mant: M::zero() }
    }

    pub fn one() -> Self {
        Self::from_mant(M::one())
    }

    pub fn from_mant(x: M) -> Self {
        if x.is_zero() {
            return Self::zero();
        }
        let sign = if x.is_negative() { -1 } else { 1 };
        Self::normalized(sign, 0, false, x.abs())
    }

    /// Panics on non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "XReal::from_f64 on non-finite value {x}");
        Self::from_mant(M::from_f64(x))
    }

    pub fn from_u64(x: u64) -> Self {
        Self::from_mant(M::from_u64(x))
    }

    pub fn ratio(num: u64, den: u64) -> Self {
        Self::from_mant(M::ratio(num, den))
    }

    pub fn pi() -> Self {
        Self::from_mant(M::pi())
    }

    /// Builds a value from raw fields, rejecting anything not in normal form.
    pub fn from_parts(sign: i8, depth: u8, tiny: bool, mant: M) -> Result<Self, XRealError> {
        let bad = |why: &str| Err(XRealError::Malformed(why.to_string()));
        if !(-1..=1).contains(&sign) {
            return bad("sign outside {-1, 0, 1}");
        }
        let m = mant.to_f64();
        if !m.is_finite() || mant.is_negative() {
            return bad("mantissa must be finite and non-negative");
        }
        if sign == 0 {
            return if depth == 0 && !tiny && mant.is_zero() {
                Ok(Self::zero())
            } else {
                bad("zero must have depth 0 and mantissa 0")
            };
        }
        if mant.is_zero() || depth > MAX_DEPTH || (depth == 0 && tiny) {
            return bad("invalid depth or mantissa for a non-zero value");
        }
        let x = XReal { sign, depth, tiny, mant };
        let n = Self::normalized(sign, depth, tiny, x.mant.clone());
        if n.depth == x.depth && n.tiny == x.tiny && n.mant.to_f64() == m {
            Ok(x)
        } else {
            bad("not in normal form")
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }
    pub fn depth(&self) -> u8 {
        self.depth
    }
    /// True when `0 < |x| < 1e-15`.
    pub fn is_tiny(&self) -> bool {
        self.tiny
    }
    pub fn mantissa(&self) -> &M {
        &self.mant
    }
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }
    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    fn normalized(sign: i8, mut depth: u8, mut tiny: bool, mut m: M) -> Self {
        debug_assert!(sign != 0);
        loop {
            let v = m.to_f64();
            if depth == 0 {
                if v > NORMAL_MAX {
                    m = m.ln();
                    depth = 1;
                    tiny = false;
                    continue;
                }
                if v < NORMAL_MIN {
                    m = m.ln().neg();
                    depth = 1;
                    tiny = true;
                    continue;
                }
                tiny = false;
                break;
            }
            if v > NORMAL_MAX {
                assert!(depth < MAX_DEPTH, "XReal tower depth limit exceeded");
                m = m.ln();
                depth += 1;
                continue;
            }
            if v <= LN_NORMAL_MAX {
                // Demote only when the lower level holds the value; rounding at the
                // boundary otherwise keeps the current depth, which keeps this idempotent.
                let down = if depth == 1 && tiny { m.neg().exp() } else { m.exp() };
                let dv = down.to_f64();
                let fits = if depth == 1 && tiny { dv >= NORMAL_MIN } else { dv <= NORMAL_MAX };
                if fits {
                    m = down;
                    depth -= 1;
                    if depth == 0 {
                        tiny = false;
                    }
                    continue;
                }
            }
            break;
        }
        XReal { sign, depth, tiny, mant: m }
    }

    fn with_sign(mut self, sign: i8) -> Self {
        if self.sign != 0 {
            self.sign = sign;
        }
        self
    }

    fn signed_mant(&self) -> M {
        if self.sign < 0 {
            self.mant.neg()
        } else {
            self.mant.clone()
        }
    }

    /// Value of a tiny number in the mantissa type, flushing to zero past the
    /// reach of any working precision.
    fn tiny_value(&self) -> M {
        if self.depth == 0 {
            return self.signed_mant();
        }
        if self.depth == 1 && self.mant.to_f64() < DIRECT_EXP_LIMIT {
            let v = self.mant.neg().exp();
            return if self.sign < 0 { v.neg() } else { v };
        }
        M::zero()
    }

    /// The value in the mantissa type when it is comfortably in range.
    fn plain(&self) -> Option<M> {
        match self.depth {
            0 => Some(self.signed_mant()),
            1 if self.mant.to_f64() <= DIRECT_EXP_LIMIT => {
                let v = if self.tiny { self.mant.neg().exp() } else { self.mant.exp() };
                Some(if self.sign < 0 { v.neg() } else { v })
            }
            _ => None,
        }
    }

    pub fn abs(&self) -> Self {
        self.clone().with_sign(if self.sign == 0 { 0 } else { 1 })
    }

    /// Nearest `f64`, saturating to infinity or zero.
    pub fn to_f64(&self) -> f64 {
        let s = self.sign as f64;
        match self.depth {
            0 => s * self.mant.to_f64(),
            1 => {
                let e = self.mant.to_f64();
                s * if self.tiny { (-e).exp() } else { e.exp() }
            }
            _ => {
                if self.tiny {
                    s * 0.0
                } else {
                    s * f64::INFINITY
                }
            }
        }
    }

    /// Re-expresses the value with another mantissa type.
    pub fn convert<N: Mantissa>(&self) -> XReal<N> {
        if self.sign == 0 {
            return XReal::zero();
        }
        XReal::normalized(self.sign, self.depth, self.tiny, N::from_f64(self.mant.to_f64()))
    }

    /// `ln|x|`; requires `x != 0`.
    fn ln_abs(&self) -> Self {
        debug_assert!(self.sign != 0);
        if self.depth == 0 {
            Self::from_mant(self.mant.ln())
        } else {
            let s = if self.tiny { -1 } else { 1 };
            Self::normalized(s, self.depth - 1, false, self.mant.clone())
        }
    }

    pub fn ln(&self) -> Result<Self, XRealError> {
        if self.sign <= 0 {
            return Err(XRealError::LogNonPositive);
        }
        Ok(self.ln_abs())
    }

    pub fn log10(&self) -> Result<Self, XRealError> {
        Ok(self.ln()? / Self::from_mant(M::from_u64(10).ln()))
    }

    pub fn exp(&self) -> Self {
        if self.sign == 0 {
            return Self::one();
        }
        if self.depth == 0 {
            if self.mant.to_f64() <= LN_NORMAL_MAX {
                return Self::from_mant(self.signed_mant().exp());
            }
            return Self::normalized(1, 1, self.sign < 0, self.mant.clone());
        }
        if self.tiny {
            return Self::from_mant(self.tiny_value().exp());
        }
        Self::normalized(1, self.depth + 1, self.sign < 0, self.mant.clone())
    }

    fn cmp_abs(&self, o: &Self) -> Ordering {
        if self.depth == 0 && o.depth == 0 {
            return self.mant.partial_cmp(&o.mant).unwrap_or(Ordering::Equal);
        }
        self.ln_abs().total_cmp(&o.ln_abs())
    }

    pub fn total_cmp(&self, o: &Self) -> Ordering {
        if self.sign != o.sign {
            return self.sign.cmp(&o.sign);
        }
        match self.sign {
            0 => Ordering::Equal,
            1 => self.cmp_abs(o),
            _ => o.cmp_abs(self),
        }
    }

    pub fn max(self, o: Self) -> Self {
        if self.total_cmp(&o) == Ordering::Less {
            o
        } else {
            self
        }
    }

    pub fn min(self, o: Self) -> Self {
        if self.total_cmp(&o) == Ordering::Greater {
            o
        } else {
            self
        }
    }

    // ln(1 + e^d) for d <= 0
    fn ln1p_exp(d: &Self) -> Self {
        if d.sign == 0 {
            return Self::from_mant(M::from_u64(2).ln());
        }
        if d.depth == 0 {
            if d.mant.to_f64() <= DIRECT_EXP_LIMIT {
                return Self::from_mant(d.signed_mant().exp().ln_1p());
            }
            return d.exp();
        }
        if d.tiny {
            return Self::from_mant(d.tiny_value().exp().ln_1p());
        }
        d.exp()
    }

    // ln(1 - e^d) for d < 0
    fn ln1m_exp(d: &Self) -> Self {
        if d.depth == 0 {
            if d.mant.to_f64() <= DIRECT_EXP_LIMIT {
                return Self::from_mant(d.signed_mant().exp_m1().neg().ln());
            }
            return -d.exp();
        }
        if d.tiny {
            let half = d.tiny_value().mul(&M::ratio(1, 2));
            return d.ln_abs() + Self::from_mant(half);
        }
        -d.exp()
    }

    fn add_impl(&self, o: &Self) -> Self {
        if self.sign == 0 {
            return o.clone();
        }
        if o.sign == 0 {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.plain(), o.plain()) {
            return Self::from_mant(a.add(&b));
        }
        let (big, small) = match self.cmp_abs(o) {
            Ordering::Less => (o, self),
            Ordering::Equal if self.sign != o.sign => return Self::zero(),
            _ => (self, o),
        };
        let la = big.ln_abs();
        let mut diff = &small.ln_abs() - &la;
        if diff.to_f64() < NEGLIGIBLE_LOG_RATIO {
            return big.clone();
        }
        if diff.is_positive() {
            // Rounding disagreed with the ordering; the magnitudes are equal to working precision.
            diff = Self::zero();
        }
        let corr = if self.sign == o.sign {
            Self::ln1p_exp(&diff)
        } else {
            if diff.sign == 0 {
                return Self::zero();
            }
            Self::ln1m_exp(&diff)
        };
        (la + corr).exp().with_sign(big.sign)
    }

    fn mul_impl(&self, o: &Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return Self::zero();
        }
        if self.depth == 0 && o.depth == 0 {
            return Self::from_mant(self.signed_mant().mul(&o.signed_mant()));
        }
        (self.ln_abs() + o.ln_abs()).exp().with_sign(self.sign * o.sign)
    }

    /// Panics on a zero divisor, like integer division.
    fn div_impl(&self, o: &Self) -> Self {
        assert!(o.sign != 0, "XReal division by zero");
        if self.sign == 0 {
            return Self::zero();
        }
        if self.depth == 0 && o.depth == 0 {
            return Self::from_mant(self.signed_mant().div(&o.signed_mant()));
        }
        (self.ln_abs() - o.ln_abs()).exp().with_sign(self.sign * o.sign)
    }

    pub fn recip(&self) -> Self {
        Self::one() / self
    }

    /// `x^p` for `x >= 0`.
    pub fn powf(&self, p: &Self) -> Result<Self, XRealError> {
        match self.sign {
            -1 => Err(XRealError::NegativeBase),
            0 => match p.sign {
                1 => Ok(Self::zero()),
                0 => Ok(Self::one()),
                _ => Err(XRealError::ZeroToNegative),
            },
            _ => Ok((p * &self.ln_abs()).exp()),
        }
    }

    /// `x^(num/den)` with the exponent formed at full mantissa precision.
    pub fn pow_ratio(&self, num: u64, den: u64) -> Result<Self, XRealError> {
        self.powf(&Self::ratio(num, den))
    }

    /// Integer power; exact for small exponents of exactly representable bases.
    pub fn powi(&self, n: i64) -> Result<Self, XRealError> {
        if n < 0 {
            if self.sign == 0 {
                return Err(XRealError::ZeroToNegative);
            }
            return Ok(self.powi(-n)?.recip());
        }
        let n = n as u64;
        if n == 0 {
            return Ok(Self::one());
        }
        if self.sign == 0 {
            return Ok(Self::zero());
        }
        let sign = if n % 2 == 1 { self.sign } else { 1 };
        if n <= POWI_BY_SQUARING {
            let mut base = self.abs();
            let mut acc = Self::one();
            let mut e = n;
            while e > 0 {
                if e & 1 == 1 {
                    acc = &acc * &base;
                }
                e >>= 1;
                if e > 0 {
                    base = &base * &base;
                }
            }
            return Ok(acc.with_sign(sign));
        }
        Ok((Self::from_u64(n) * self.ln_abs()).exp().with_sign(sign))
    }

    pub fn sqrt(&self) -> Result<Self, XRealError> {
        match self.sign {
            -1 => Err(XRealError::NegativeBase),
            0 => Ok(Self::zero()),
            _ if self.depth == 0 => Ok(Self::from_mant(self.mant.sqrt())),
            _ => Ok((self.ln_abs() * Self::ratio(1, 2)).exp()),
        }
    }

    /// Absolute uncertainty of `ln|x|` when the mantissa carries relative error `eps`.
    ///
    /// Each tower level multiplies the relative error by the value below it, so
    /// deep values quickly become unresolvable (`f64::INFINITY`).
    pub fn log_uncertainty(&self, eps: f64) -> f64 {
        if self.sign == 0 {
            return f64::INFINITY;
        }
        if self.depth == 0 {
            return eps;
        }
        let mut v = self.mant.to_f64();
        let mut rel = eps;
        for _ in 1..self.depth {
            rel *= v;
            v = v.exp();
        }
        rel * v
    }

    /// `|a - b| / max(|a|, |b|)` as a plain number.
    pub fn rel_diff(&self, o: &Self) -> f64 {
        if self.sign == 0 && o.sign == 0 {
            return 0.0;
        }
        let d = (self - o).abs();
        let m = self.abs().max(o.abs());
        (d / m).to_f64()
    }

    /// Relative difference of the natural logarithms of two positive values.
    pub fn log_rel_diff(&self, o: &Self) -> Result<f64, XRealError> {
        Ok(self.ln()?.rel_diff(&o.ln()?))
    }
}

impl<M: Mantissa> PartialOrd for XReal<M> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.total_cmp(o))
    }
}

macro_rules! bin_op {
    ($tr:ident, $f:ident, $imp:ident) => {
        impl<M: Mantissa> $tr<&XReal<M>> for &XReal<M> {
            type Output = XReal<M>;
            fn $f(self, o: &XReal<M>) -> XReal<M> {
                self.$imp(o)
            }
        }
        impl<M: Mantissa> $tr<XReal<M>> for XReal<M> {
            type Output = XReal<M>;
            fn $f(self, o: XReal<M>) -> XReal<M> {
                self.$imp(&o)
            }
        }
        impl<M: Mantissa> $tr<&XReal<M>> for XReal<M> {
            type Output = XReal<M>;
            fn $f(self, o: &XReal<M>) -> XReal<M> {
                self.$imp(o)
            }
        }
        impl<M: Mantissa> $tr<XReal<M>> for &XReal<M> {
            type Output = XReal<M>;
            fn $f(self, o: XReal<M>) -> XReal<M> {
                self.$imp(&o)
            }
        }
    };
}

bin_op!(Add, add, add_impl);
bin_op!(Mul, mul, mul_impl);
bin_op!(Div, div, div_impl);

impl<M: Mantissa> XReal<M> {
    fn sub_impl(&self, o: &Self) -> Self {
        self.add_impl(&-o)
    }
}
bin_op!(Sub, sub, sub_impl);

impl<M: Mantissa> Neg for &XReal<M> {
    type Output = XReal<M>;
    fn neg(self) -> XReal<M> {
        let s = -self.sign;
        self.clone().with_sign(s)
    }
}

impl<M: Mantissa> Neg for XReal<M> {
    type Output = XReal<M>;
    fn neg(self) -> XReal<M> {
        -&self
    }
}

impl<M: fmt::Debug> fmt::Debug for XReal<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "XReal {{ sign: {}, depth: {}, tiny: {}, mantissa: {:?} }}",
            self.sign, self.depth, self.tiny, self.mant
        )
    }
}

impl<M: Mantissa> fmt::Display for XReal<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        if self.depth == 0 {
            return write!(f, "{:e}", self.to_f64());
        }
        let s = if self.sign < 0 { "-" } else { "" };
        let l10 = self.abs().log10().expect("non-zero magnitude");
        if l10.depth == 0 {
            let e = l10.to_f64();
            let mut fl = e.floor();
            let mut m = (10f64.powf(e - fl) * 1e6).round() / 1e6;
            if m >= 10.0 {
                m /= 10.0;
                fl += 1.0;
            }
            write!(f, "{s}{m:.6}e{}", fl as i64)
        } else {
            write!(f, "{s}10^({l10})")
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Encoded {
    sign: i8,
    depth: u8,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    tiny: bool,
    mantissa: f64,
}

impl Serialize for XReal<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Encoded { sign: self.sign, depth: self.depth, tiny: self.tiny, mantissa: self.mant }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for XReal<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let e = Encoded::deserialize(d)?;
        XReal::from_parts(e.sign, e.depth, e.tiny, e.mantissa).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mantissa::Hp;

    type X = XReal<f64>;

    #[test]
    fn normal_form_boundaries() {
        let z = X::zero();
        assert_eq!((z.sign(), z.depth(), z.mantissa()), (0, 0, &0.0));
        let big = X::from_f64(1e20);
        assert_eq!(big.depth(), 1);
        assert!((big.mantissa() - 20.0 * std::f64::consts::LN_10).abs() < 1e-12);
        let small = X::from_f64(1e-20);
        assert_eq!(small.depth(), 1);
        assert!(small.is_tiny());
        assert!((small.to_f64() / 1e-20 - 1.0).abs() < 1e-13);
        assert_eq!(X::from_f64(1e15).depth(), 0);
    }

    #[test]
    fn tower_levels() {
        let e100 = X::from_f64(100.0).exp();
        assert_eq!(e100.depth(), 1);
        let ee = X::from_f64(1e20).exp();
        assert_eq!(ee.depth(), 2);
        let eee = ee.exp();
        assert_eq!(eee.depth(), 3);
        assert_eq!(eee.ln().unwrap(), ee);
        let t = (-&ee).exp();
        assert!(t.is_tiny());
        assert_eq!(t.depth(), 3);
        assert!(t.to_f64() == 0.0 && t.is_positive());
    }

    #[test]
    fn exact_small_integer_powers() {
        let x = X::from_u64(42);
        assert_eq!(x.powi(2).unwrap().to_f64(), 1764.0);
        assert_eq!(X::from_u64(9).powi(19).unwrap().depth(), 1);
        assert_eq!((-X::from_u64(3)).powi(3).unwrap().to_f64(), -27.0);
    }

    #[test]
    fn cancellation_between_huge_values() {
        let a = X::from_f64(1e300).powi(40).unwrap();
        let b = &a * X::from_f64(1.5);
        let d = &b - &a;
        assert!(d.rel_diff(&(&a * X::from_f64(0.5))) < 1e-10);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn hp_tower_matches_f64() {
        let a = XReal::<Hp>::from_u64(522_764_970).powi(6).unwrap();
        let b = X::from_u64(522_764_970).powi(6).unwrap();
        assert!(a.convert::<f64>().rel_diff(&b) < 1e-13);
    }

    #[test]
    fn display_forms() {
        assert_eq!(X::from_u64(42).to_string(), "4.2e1");
        assert_eq!(X::from_f64(1e300).powi(2).unwrap().to_string(), "1.000000e600");
        let deep = X::from_f64(1e20).exp();
        assert!(deep.to_string().starts_with("10^("));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        for v in [X::zero(), X::from_f64(-3.25), X::from_f64(1e-30), X::from_f64(1e20).exp()] {
            let s = serde_json::to_string(&v).unwrap();
            let back: X = serde_json::from_str(&s).unwrap();
            assert_eq!(back, v);
        }
        let bad = r#"{"sign":1,"depth":0,"mantissa":1e20}"#;
        assert!(serde_json::from_str::<X>(bad).is_err());
    }
}
