use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::Grid;
use crate::norms::h_norm;

/// Scales `u` to unit discrete norm; the zero vector is returned unchanged.
pub fn normalize(grid: &Grid, u: &mut [f64]) -> f64 {
    let n = h_norm(grid, u);
    if n > 0.0 {
        u.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Samples of `sin(mπx/L)`, normalized.
pub fn sine_state(grid: &Grid, mode: usize) -> Vec<f64> {
    let k = mode as f64 * PI / grid.length;
    let mut u: Vec<f64> = (0..grid.nodes).map(|i| (k * grid.x(i)).sin()).collect();
    normalize(grid, &mut u);
    u
}

/// `Σ_{n<=modes} ±n^{-1/2} sin(nπx/L)` with seeded random signs, normalized.
/// Modes beyond the grid's resolution are dropped.
pub fn rough_state(grid: &Grid, seed: u64, modes: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = modes.min(grid.nodes);
    let mut u = vec![0.0; grid.nodes];
    for n in 1..=modes {
        let s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let c = s / (n as f64).sqrt();
        let k = n as f64 * PI / grid.length;
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += c * (k * grid.x(i)).sin();
        }
    }
    normalize(grid, &mut u);
    u
}
