//! Sobolev embedding and interpolation constants `E^n_m`, norm-equivalence
//! constants `G^m` and extension-operator norms `λ_m`, for orders up to 7.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::CoreError;
use crate::mantissa::Mantissa;
use crate::xreal::XReal;

pub const MAX_ORDER: usize = 7;

/// Base of the diagonal recursion, `E^1_2`.
pub const E12: u64 = 42;

/// Named table of extension-operator norms `λ_0..λ_7`.
///
/// Only existence of the extension operator is known, so these are inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaProfile {
    /// `λ_m = 2^(m+1) (m+1)!`, a generous placeholder.
    Default,
    /// `λ_m = 1`, the smallest norm any extension operator can have.
    Unit,
    Custom(Vec<f64>),
}

impl LambdaProfile {
    pub fn name(&self) -> String {
        match self {
            LambdaProfile::Default => "default".into(),
            LambdaProfile::Unit => "unit".into(),
            LambdaProfile::Custom(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                format!("custom:{}", parts.join(","))
            }
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            LambdaProfile::Default => {
                "placeholder table 2^(m+1)(m+1)!; not derived from any extension construction"
            }
            LambdaProfile::Unit => "lower bound lambda_m = 1; optimistic",
            LambdaProfile::Custom(_) => "user supplied",
        }
    }

    fn value(&self, m: usize) -> f64 {
        match self {
            LambdaProfile::Default => {
                let fact: u64 = (1..=(m as u64 + 1)).product();
                (1u64 << (m + 1)) as f64 * fact as f64
            }
            LambdaProfile::Unit => 1.0,
            LambdaProfile::Custom(v) => v[m],
        }
    }
}

impl FromStr for LambdaProfile {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        let s = s.trim();
        match s {
            "default" => return Ok(LambdaProfile::Default),
            "unit" => return Ok(LambdaProfile::Unit),
            _ => {}
        }
        let Some(list) = s.strip_prefix("custom:") else {
            return Err(CoreError::UnknownProfile(s.to_string()));
        };
        let vals = list
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CoreError::InvalidProfile(e.to_string()))?;
        if vals.len() != MAX_ORDER + 1 {
            return Err(CoreError::InvalidProfile(format!(
                "expected {} values, got {}",
                MAX_ORDER + 1,
                vals.len()
            )));
        }
        if let Some(bad) = vals.iter().find(|v| !v.is_finite() || **v < 1.0) {
            return Err(CoreError::InvalidProfile(format!("value {bad} is below 1")));
        }
        Ok(LambdaProfile::Custom(vals))
    }
}

impl fmt::Display for LambdaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn check_pair(n: usize, m: usize) -> Result<(), CoreError> {
    if n == 0 || n >= m || m > MAX_ORDER {
        Err(CoreError::IndexOutOfRange { n, m })
    } else {
        Ok(())
    }
}

fn binomial(m: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (m + 1 - i) / i)
}

/// Complete table of constants for orders `0..=7`.
#[derive(Debug, Clone)]
pub struct SobolevTable<M = f64> {
    e: Vec<Vec<Option<XReal<M>>>>,
    g: Vec<XReal<M>>,
    lambda: Vec<XReal<M>>,
    profile: LambdaProfile,
    e13_stub: bool,
}

impl<M: Mantissa> SobolevTable<M> {
    pub fn new(profile: LambdaProfile) -> Self {
        let mut e: Vec<Vec<Option<XReal<M>>>> = vec![vec![None; MAX_ORDER + 1]; MAX_ORDER + 1];
        e[1][2] = Some(XReal::from_u64(E12));
        for k in 2..MAX_ORDER {
            let prev = e[k - 1][k].clone().expect("diagonal filled in order");
            let c = XReal::from_u64(2 * E12).powi(k as i64).expect("positive base");
            e[k][k + 1] = Some(c * prev.powi(k as i64).expect("positive base"));
        }
        for gap in 2..MAX_ORDER {
            for n in 1..=(MAX_ORDER - gap) {
                let m = n + gap;
                let diag = e[n][n + 1].clone().expect("diagonal");
                let inner = e[n + 1][m].clone().expect("shorter gap filled first");
                e[n][m] = Some(diag * (inner + XReal::one()));
            }
        }
        let g = (0..=MAX_ORDER)
            .map(|m| {
                let mut acc = XReal::one();
                for a in 1..m {
                    let c = XReal::from_u64(binomial(m as u64, a as u64));
                    acc = acc + c * e[a][m].clone().expect("filled");
                }
                acc
            })
            .collect();
        let lambda = (0..=MAX_ORDER).map(|m| XReal::from_f64(profile.value(m))).collect();
        SobolevTable { e, g, lambda, profile, e13_stub: false }
    }

    /// Replaces `E^1_3` for covering-number tests. The rest of the table is untouched.
    pub fn with_e13_stub(mut self, value: XReal<M>) -> Self {
        self.e[1][3] = Some(value);
        self.e13_stub = true;
        self
    }

    pub fn is_stubbed(&self) -> bool {
        self.e13_stub
    }

    pub fn e(&self, n: usize, m: usize) -> Result<&XReal<M>, CoreError> {
        check_pair(n, m)?;
        Ok(self.e[n][m].as_ref().expect("table complete"))
    }

    pub fn g(&self, m: usize) -> Result<&XReal<M>, CoreError> {
        self.g.get(m).ok_or(CoreError::OrderOutOfRange(m))
    }

    pub fn lambda(&self, m: usize) -> Result<&XReal<M>, CoreError> {
        self.lambda.get(m).ok_or(CoreError::OrderOutOfRange(m))
    }

    pub fn profile(&self) -> &LambdaProfile {
        &self.profile
    }

    /// Upper bound for `‖f‖²_{H^n}` from `‖f‖_{L²}` and `‖f‖_{H^m}`.
    pub fn interpolation_bound(
        &self,
        n: usize,
        m: usize,
        l2_norm: &XReal<M>,
        hm_norm: &XReal<M>,
    ) -> Result<XReal<M>, CoreError> {
        let c = self.e(n, m)? * XReal::from_u64(2) + XReal::one();
        let (n64, m64) = (n as u64, m as u64);
        let a = l2_norm.pow_ratio(2 * (m64 - n64), m64)?;
        let b = hm_norm.pow_ratio(2 * n64, m64)?;
        Ok(c * a * b)
    }

    /// Flat export keyed `E[n][m]`, `G[m]`, `lambda[m]`.
    pub fn export(&self) -> BTreeMap<String, XReal<M>> {
        let mut out = BTreeMap::new();
        for n in 1..MAX_ORDER {
            for m in (n + 1)..=MAX_ORDER {
                out.insert(format!("E[{n}][{m}]"), self.e[n][m].clone().expect("filled"));
            }
        }
        for m in 0..=MAX_ORDER {
            out.insert(format!("G[{m}]"), self.g[m].clone());
            out.insert(format!("lambda[{m}]"), self.lambda[m].clone());
        }
        out
    }
}

fn shared_table() -> &'static SobolevTable<f64> {
    static TABLE: OnceLock<SobolevTable<f64>> = OnceLock::new();
    TABLE.get_or_init(|| SobolevTable::new(LambdaProfile::Default))
}

/// `E^n_m` from the memoized table.
pub fn e_constant(n: usize, m: usize) -> Result<XReal, CoreError> {
    shared_table().e(n, m).cloned()
}

/// `G^m` from the memoized table.
pub fn g_constant(m: usize) -> Result<XReal, CoreError> {
    shared_table().g(m).cloned()
}

pub fn interpolation_bound(n: usize, m: usize, l2_norm: &XReal, hm_norm: &XReal) -> Result<XReal, CoreError> {
    shared_table().interpolation_bound(n, m, l2_norm, hm_norm)
}

/// `λ_m` for a profile.
pub fn stein_lambda(m: usize, profile: &LambdaProfile) -> Result<XReal, CoreError> {
    if m > MAX_ORDER {
        return Err(CoreError::OrderOutOfRange(m));
    }
    Ok(XReal::from_f64(profile.value(m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(6, 0), 1);
        assert_eq!(binomial(2, 1), 2);
    }

    #[test]
    fn profiles_parse() {
        assert_eq!("unit".parse::<LambdaProfile>().unwrap(), LambdaProfile::Unit);
        let p: LambdaProfile = "custom:1,2,3,4,5,6,7,8".parse().unwrap();
        assert_eq!(p.value(7), 8.0);
        assert!("custom:1,2".parse::<LambdaProfile>().is_err());
        assert!("custom:0.5,2,3,4,5,6,7,8".parse::<LambdaProfile>().is_err());
        assert!(matches!("stein".parse::<LambdaProfile>(), Err(CoreError::UnknownProfile(_))));
        assert_eq!(LambdaProfile::Default.value(0), 2.0);
        assert_eq!(LambdaProfile::Default.value(3), 16.0 * 24.0);
    }

    #[test]
    fn stub_only_touches_e13() {
        let t = SobolevTable::<f64>::new(LambdaProfile::Default).with_e13_stub(XReal::from_u64(6));
        assert_eq!(t.e(1, 3).unwrap().to_f64(), 6.0);
        assert_eq!(t.e(2, 3).unwrap().to_f64(), 12_446_784.0);
        assert!(t.is_stubbed());
    }
}
