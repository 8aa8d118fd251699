use obscost_core::flow::f_constants;
use obscost_core::sobolev::{LambdaProfile, SobolevTable};
use obscost_kdv::smoothing::{linear_fit, smoothing_rate_fit, SmoothingOptions};
use obscost_kdv::{build_operator, rough_state, sine_state, Grid, KdvError};

#[test]
fn fit_recovers_exact_power() {
    let x: Vec<f64> = (1..10).map(|i| (i as f64).ln()).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
    let (s, c) = linear_fit(&x, &y);
    assert!((s + 0.5).abs() < 1e-14 && (c - 2.0).abs() < 1e-14);
}

#[test]
fn rough_data_smooths_at_half_rate() {
    let length = 5.5;
    let fc = f_constants(length, &SobolevTable::new(LambdaProfile::Default)).unwrap();
    let g = Grid::new(length, 511).unwrap();
    let op = build_operator(g).unwrap();
    let u0 = rough_state(&g, 7, 100);
    let opts = SmoothingOptions::default();
    let fit1 = smoothing_rate_fit(&op, &u0, 1, (1e-3, 1e-1), &fc, &opts).unwrap();
    assert!((-0.75..=-0.25).contains(&fit1.slope), "slope {}", fit1.slope);
    assert!(fit1.all_below_bound);
    assert_eq!(fit1.samples.len(), 16);
    let fit0 = smoothing_rate_fit(&op, &u0, 0, (1e-3, 1e-1), &fc, &opts).unwrap();
    assert!((-0.1..=0.0).contains(&fit0.slope), "slope {}", fit0.slope);
}

#[test]
fn window_and_state_validation() {
    let fc = f_constants(5.5, &SobolevTable::new(LambdaProfile::Default)).unwrap();
    let g = Grid::new(5.5, 64).unwrap();
    let op = build_operator(g).unwrap();
    let u0 = sine_state(&g, 1);
    let opts = SmoothingOptions { dt: 1e-4, ..Default::default() };
    assert!(matches!(
        smoothing_rate_fit(&op, &u0, 1, (1e-2, 5e-2), &fc, &opts),
        Err(KdvError::WindowTooNarrow { .. })
    ));
    assert!(smoothing_rate_fit(&op, &u0, 1, (1e-2, 10.0), &fc, &opts).is_err());
    let half: Vec<f64> = u0.iter().map(|v| 0.5 * v).collect();
    assert!(smoothing_rate_fit(&op, &half, 1, (1e-2, 1e-1), &fc, &opts).is_err());
    assert!(matches!(smoothing_rate_fit(&op, &u0, 4, (1e-2, 1e-1), &fc, &opts), Err(KdvError::OrderTooHigh(4))));
}
