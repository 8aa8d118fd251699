//! Scalar backends for [`XReal`](crate::XReal).
//!
//! `f64` is the working precision. [`Hp`] is a 128-bit binary float used to
//! re-evaluate certificates and as a test oracle.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};

/// Operations a mantissa type must provide.
pub trait Mantissa: Clone + fmt::Debug + PartialOrd + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn from_u64(x: u64) -> Self;
    fn to_f64(&self) -> f64;
    /// Ratio of two integers, rounded once.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).div(&Self::from_u64(den))
    }
    fn pi() -> Self;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln_1p(&self) -> Self;
    fn exp_m1(&self) -> Self;
    fn sqrt(&self) -> Self;

    fn zero() -> Self {
        Self::from_u64(0)
    }
    fn one() -> Self {
        Self::from_u64(1)
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
    fn is_negative(&self) -> bool {
        self.partial_cmp(&Self::zero()) == Some(Ordering::Less)
    }
    fn is_zero(&self) -> bool {
        self.partial_cmp(&Self::zero()) == Some(Ordering::Equal)
    }
}

impl Mantissa for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_u64(x: u64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }
    fn exp_m1(&self) -> Self {
        f64::exp_m1(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

/// Working precision of [`Hp`] in bits.
pub const HP_BITS: usize = 128;

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459";

type Big = FBig<HalfEven, 2>;

/// 128-bit binary floating point number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Hp(Big);

impl Hp {
    fn wrap(x: Big) -> Self {
        Hp(x.with_precision(HP_BITS).value())
    }

    /// Parses a decimal literal at full working precision.
    pub fn parse(s: &str) -> Option<Self> {
        let d = DBig::from_str(s).ok()?;
        let digits = HP_BITS / 3 + 8;
        let b = d
            .with_precision(digits)
            .value()
            .with_rounding::<HalfEven>()
            .with_base_and_precision::<2>(HP_BITS)
            .value();
        Some(Hp(b))
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self
            .0
            .clone()
            .with_rounding::<dashu_float::round::mode::HalfAway>()
            .with_base_and_precision::<10>(40)
            .value();
        write!(f, "{d}")
    }
}

impl Mantissa for Hp {
    fn from_f64(x: f64) -> Self {
        Hp::wrap(Big::try_from(x).expect("finite f64"))
    }
    fn from_u64(x: u64) -> Self {
        Hp::wrap(Big::from(x))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn pi() -> Self {
        Hp::parse(PI_DIGITS).expect("valid literal")
    }
    fn add(&self, o: &Self) -> Self {
        Hp::wrap(&self.0 + &o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        Hp::wrap(&self.0 - &o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        Hp::wrap(&self.0 * &o.0)
    }
    fn div(&self, o: &Self) -> Self {
        Hp::wrap(&self.0 / &o.0)
    }
    fn neg(&self) -> Self {
        Hp(-self.0.clone())
    }
    fn ln(&self) -> Self {
        Hp::wrap(self.0.ln())
    }
    fn exp(&self) -> Self {
        Hp::wrap(self.0.exp())
    }
    fn ln_1p(&self) -> Self {
        Hp::wrap(self.0.ln_1p())
    }
    fn exp_m1(&self) -> Self {
        Hp::wrap(self.0.exp_m1())
    }
    fn sqrt(&self) -> Self {
        Hp::wrap(self.0.sqrt())
    }
}
