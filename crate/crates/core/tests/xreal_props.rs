use obscost_core::{Hp, XReal, NORMAL_MAX, NORMAL_MIN};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e300..1e300f64, -1e3..1e3f64, -1e-3..1e-3f64]
}

fn check_normal(x: &XReal) {
    if x.sign() == 0 {
        assert_eq!(x.depth(), 0);
        assert_eq!(*x.mantissa(), 0.0);
        return;
    }
    let m = *x.mantissa();
    if x.depth() == 0 {
        assert!((NORMAL_MIN..=NORMAL_MAX).contains(&m), "{x:?}");
    } else {
        assert!(m > NORMAL_MAX.ln() && m <= NORMAL_MAX, "{x:?}");
    }
}

proptest! {
    #[test]
    fn plain_values_round_trip(v in finite()) {
        let x = XReal::from_f64(v);
        check_normal(&x);
        prop_assert!((x.to_f64() - v).abs() <= 1e-12 * v.abs());
        prop_assert_eq!(x.is_zero(), v == 0.0);
    }

    #[test]
    fn multiplication_matches_logs(a in 1e-200..1e200f64, b in 1e-200..1e200f64) {
        let p = XReal::from_f64(a) * XReal::from_f64(b);
        check_normal(&p);
        let want = a.ln() + b.ln();
        prop_assert!((p.ln().unwrap().to_f64() - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn same_sign_addition_is_monotone(a in 0.0..1e12f64, e in 0u32..5) {
        let big = XReal::from_f64(a + 1.0).exp();
        let big = (0..e).fold(big, |acc, _| acc.exp());
        let small = XReal::from_f64(a);
        let s = &big + &small;
        check_normal(&s);
        prop_assert!(s >= big && s >= small);
    }

    #[test]
    fn ordering_matches_f64(a in finite(), b in finite()) {
        let (x, y): (XReal, XReal) = (XReal::from_f64(a), XReal::from_f64(b));
        prop_assert_eq!(x.partial_cmp(&y), a.partial_cmp(&b));
    }

    #[test]
    fn ln_exp_inverse(v in 1.0..700.0f64, levels in 0usize..4) {
        let mut x: XReal = XReal::from_f64(v);
        for _ in 0..levels {
            x = x.exp();
            check_normal(&x);
        }
        for _ in 0..levels {
            x = x.ln().unwrap();
        }
        prop_assert!((x.to_f64() - v).abs() <= 1e-9 * v.abs().max(1.0));
    }

    #[test]
    fn integer_powers(v in 0.5..40.0f64, n in 0i64..60) {
        let p: XReal = XReal::from_f64(v).powi(n).unwrap();
        let want = n as f64 * v.ln();
        let got = p.ln().unwrap().to_f64();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn json_round_trip(v in finite(), levels in 0usize..4, neg in any::<bool>()) {
        let mut x: XReal = XReal::from_f64(v);
        for _ in 0..levels {
            x = x.exp();
        }
        if neg {
            x = x.recip();
        }
        let s = serde_json::to_string(&x).unwrap();
        let back: XReal = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn precision_conversion_is_faithful(v in 1e-100..1e100f64) {
        let x = XReal::from_f64(v);
        let h: XReal<Hp> = x.convert();
        prop_assert_eq!(h.convert::<f64>(), x);
    }
}

#[test]
fn small_powers_are_exact() {
    assert_eq!(XReal::<f64>::from_u64(9).powi(15).unwrap().to_f64(), 9f64.powi(15));
    assert_eq!(XReal::<f64>::from_u64(84).powi(2).unwrap().to_f64(), 7056.0);
}

#[test]
fn malformed_json_is_rejected() {
    for s in [
        r#"{"sign":1,"depth":0,"mantissa":1e20}"#,
        r#"{"sign":0,"depth":0,"mantissa":3.0}"#,
        r#"{"sign":2,"depth":0,"mantissa":3.0}"#,
        r#"{"sign":1,"depth":1,"mantissa":5.0}"#,
    ] {
        assert!(serde_json::from_str::<XReal>(s).is_err(), "{s}");
    }
}
