use std::f64::consts::PI;

use obscost_kdv::{build_operator, dot, BandMatrix, DiscreteOperator, Grid, KdvError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn op(length: f64, n: usize) -> DiscreteOperator {
    build_operator(Grid::new(length, n).unwrap()).unwrap()
}

/// Max error of `A_h sin(πx/L)` against `-u_x - u_xxx` over nodes at least 3h from the ends.
fn sine_residual(length: f64, n: usize) -> f64 {
    let a = op(length, n);
    let k = PI / length;
    let u: Vec<f64> = a.grid.coordinates().iter().map(|x| (k * x).sin()).collect();
    let au = a.apply(&u).unwrap();
    (2..n - 2)
        .map(|i| {
            let x = a.grid.x(i);
            let exact = -k * (k * x).cos() + k * k * k * (k * x).cos();
            (au[i] - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn interior_residual_is_second_order() {
    let mut prev = sine_residual(5.5, 63);
    for n in [127, 255, 511] {
        let r = sine_residual(5.5, n);
        let ratio = prev / r;
        assert!(ratio > 3.6 && ratio < 4.4, "n = {n}: ratio {ratio}");
        prev = r;
    }
}

#[test]
fn zero_maps_to_zero() {
    let a = op(4.0, 32);
    assert!(a.apply(&vec![0.0; 32]).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn energy_identity_of_the_quadratic_form() {
    let a = op(5.5, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = a.quad_form(&v).unwrap();
        let scale = dot(&a.grid, &v, &v) / (a.grid.h * a.grid.h * a.grid.h);
        assert!((q - a.energy_rate(&v)).abs() <= 1e-12 * scale, "{q} vs {}", a.energy_rate(&v));
        // Dissipativity in the slack form with D_0 the one-sided flux.
        let f = a.flux(&v);
        assert!(q <= 1e-8 * dot(&a.grid, &v, &v) + 0.5 * f * f);
        assert!(q <= 0.0);
    }
}

#[test]
fn pentadiagonal_and_transpose() {
    let a = op(4.0, 20);
    for i in 0..20usize {
        for j in 0..20 {
            if i.abs_diff(j) > 2 {
                assert_eq!(a.entry(i, j), 0.0);
            }
            assert_eq!(a.transpose().entry(j, i), a.entry(i, j));
        }
    }
}

#[test]
fn small_grid_rejected() {
    assert!(matches!(Grid::new(4.0, 8), Err(KdvError::GridTooSmall { .. })));
    assert!(matches!(Grid::new(-1.0, 32), Err(KdvError::InvalidLength(_))));
    let g = Grid::new(4.0, 39).unwrap();
    assert!((g.h * 40.0 - 4.0).abs() < 1e-15);
}

#[test]
fn band_lu_matches_dense_solve() {
    let n = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut m = BandMatrix::zeros(n, 2, 3);
    for i in 0..n {
        for j in i.saturating_sub(2)..=(i + 3).min(n - 1) {
            // Small diagonal forces row interchanges.
            let v = if i == j { 0.01 } else { rng.gen_range(-1.0..1.0) };
            m.set(i, j, v);
        }
    }
    let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
    let mut b = vec![0.0; n];
    m.mul_vec(&x, &mut b);
    let lu = m.clone().factor().unwrap();
    lu.solve_in_place(&mut b);
    for (p, q) in b.iter().zip(&x) {
        assert!((p - q).abs() < 1e-9, "{p} vs {q}");
    }
}

#[test]
fn singular_band_reports_column() {
    let mut m = BandMatrix::identity(5, 1, 1);
    m.set(3, 3, 0.0);
    assert_eq!(m.factor().unwrap_err(), 3);
}
