use std::f64::consts::PI;

use obscost_kdv::{
    build_operator, discrete_norm, evolve, evolve_many, h_norm, seminorm, sine_state, EvolveOptions, Grid,
    KdvError, Scheme, Stepper,
};

/// Smooth bump supported in `(L/4, 3L/4)`, normalized.
fn bump(grid: &Grid) -> Vec<f64> {
    let (c, r) = (grid.length / 2.0, grid.length / 4.0);
    let mut u: Vec<f64> = grid
        .coordinates()
        .iter()
        .map(|x| {
            let s = (x - c) / r;
            if s.abs() < 1.0 {
                (-1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        })
        .collect();
    obscost_kdv::normalize(grid, &mut u);
    u
}

fn energy_residual(n: usize) -> f64 {
    let g = Grid::new(5.5, n).unwrap();
    let op = build_operator(g).unwrap();
    let tr = evolve(&op, &bump(&g), 1.0, 1e-4, Scheme::Trapezoidal, &EvolveOptions::default()).unwrap();
    assert!(tr.max_energy_excess <= 1e-8, "energy law excess {}", tr.max_energy_excess);
    tr.energy_residual()
}

#[test]
fn energy_identity_and_refinement() {
    let coarse = energy_residual(256);
    let fine = energy_residual(513);
    eprintln!("energy residual {coarse:e} -> {fine:e}");
    assert!(coarse <= 1e-4, "{coarse}");
    assert!(coarse / fine >= 3.0, "{coarse} / {fine}");
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid::new(4.0, 32).unwrap();
    let op = build_operator(g).unwrap();
    let tr = evolve(&op, &vec![0.0; 32], 0.1, 0.01, Scheme::ImplicitEuler, &EvolveOptions::every(1)).unwrap();
    assert!(tr.flux.iter().all(|f| *f == 0.0));
    assert!(tr.states.iter().flatten().all(|v| *v == 0.0));
    assert_eq!(tr.states.len(), 11);
}

#[test]
fn norms_non_increasing_for_both_schemes() {
    let g = Grid::new(5.5, 128).unwrap();
    let op = build_operator(g).unwrap();
    let u0 = obscost_kdv::rough_state(&g, 5, 100);
    for scheme in [Scheme::ImplicitEuler, Scheme::Trapezoidal] {
        let tr = evolve(&op, &u0, 0.5, 1e-3, scheme, &EvolveOptions::default()).unwrap();
        assert!(tr.max_norm_increase() <= 1e-12, "{scheme}: {}", tr.max_norm_increase());
        if scheme == Scheme::Trapezoidal {
            assert!(tr.max_energy_excess <= 1e-8);
        }
    }
}

#[test]
fn space_time_h1_bound() {
    let (length, t) = (5.5, 1.0);
    let g = Grid::new(length, 256).unwrap();
    let op = build_operator(g).unwrap();
    let u0 = bump(&g);
    let tr = evolve(&op, &u0, t, 1e-3, Scheme::Trapezoidal, &EvolveOptions::every(1)).unwrap();
    let w = tr.weights();
    let lhs: f64 = tr.states.iter().zip(&w).map(|(u, wk)| wk * seminorm(u, 1, &g).unwrap().powi(2)).sum();
    let rhs = 1.05 * (t + length) / 3.0 * h_norm(&g, &u0).powi(2);
    assert!(lhs <= rhs, "{lhs} > {rhs}");
}

#[test]
fn semigroup_property() {
    let g = Grid::new(5.5, 96).unwrap();
    let op = build_operator(g).unwrap();
    let u0 = obscost_kdv::rough_state(&g, 1, 40);
    let o = EvolveOptions::default();
    let whole = evolve(&op, &u0, 0.5, 1e-3, Scheme::Trapezoidal, &o).unwrap();
    let first = evolve(&op, &u0, 0.2, 1e-3, Scheme::Trapezoidal, &o).unwrap();
    let second = evolve(&op, first.final_state(), 0.3, 1e-3, Scheme::Trapezoidal, &o).unwrap();
    for (a, b) in whole.final_state().iter().zip(second.final_state()) {
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn linearity() {
    let g = Grid::new(4.0, 64).unwrap();
    let op = build_operator(g).unwrap();
    let u = obscost_kdv::rough_state(&g, 2, 30);
    let v = sine_state(&g, 3);
    let (a, b) = (0.7, -2.5);
    let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
    let runs = evolve_many(&op, &[u, v, w], 0.3, 1e-3, Scheme::Trapezoidal, &EvolveOptions::default()).unwrap();
    for i in 0..64 {
        let combo = a * runs[0].final_state()[i] + b * runs[1].final_state()[i];
        assert!((combo - runs[2].final_state()[i]).abs() <= 1e-12, "node {i}");
    }
    for j in 0..=runs[0].steps {
        assert!((a * runs[0].flux[j] + b * runs[1].flux[j] - runs[2].flux[j]).abs() <= 1e-10);
    }
}

#[test]
fn sine_norms_match_exact_integrals() {
    let length = 5.5;
    let mut prev = [f64::NAN; 2];
    for n in [127, 255] {
        let g = Grid::new(length, n).unwrap();
        let k = PI / length;
        let u: Vec<f64> = g.coordinates().iter().map(|x| (k * x).sin()).collect();
        let n0 = discrete_norm(&u, 0, &g).unwrap();
        let n1 = discrete_norm(&u, 1, &g).unwrap();
        let e0 = (n0 - (length / 2.0).sqrt()).abs();
        let e1 = (n1 - (length / 2.0 + k * k * length / 2.0).sqrt()).abs();
        assert!(e0 < 1e-12);
        assert!(e1 < 10.0 * g.h * g.h, "{e1}");
        if !prev[1].is_nan() {
            assert!(prev[1] / e1 > 3.0);
        }
        prev = [e0, e1];
    }
    let g = Grid::new(length, 64).unwrap();
    assert_eq!(discrete_norm(&vec![0.0; 64], 3, &g).unwrap(), 0.0);
    assert!(matches!(discrete_norm(&vec![0.0; 64], 4, &g), Err(KdvError::OrderTooHigh(4))));
}

#[test]
fn input_validation() {
    let g = Grid::new(4.0, 32).unwrap();
    let op = build_operator(g).unwrap();
    let u = vec![0.0; 32];
    let o = EvolveOptions::default();
    assert!(matches!(evolve(&op, &u, 0.001, 0.01, Scheme::Trapezoidal, &o), Err(KdvError::HorizonTooShort { .. })));
    assert!(matches!(evolve(&op, &u, 1.0, 0.0, Scheme::Trapezoidal, &o), Err(KdvError::NonPositive("dt"))));
    assert!(matches!(evolve(&op, &u[..5], 1.0, 0.1, Scheme::Trapezoidal, &o), Err(KdvError::DimensionMismatch { .. })));
    assert!(evolve(&op, &u, 0.105, 0.01, Scheme::Trapezoidal, &o).is_err());
    assert_eq!("trapezoidal".parse::<Scheme>().unwrap(), Scheme::Trapezoidal);
    assert!("rk4".parse::<Scheme>().is_err());
    let s = Stepper::new(&op, 0.01, Scheme::ImplicitEuler).unwrap();
    assert_eq!(s.steps_for(1.0).unwrap(), 100);
}
