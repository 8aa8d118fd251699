use crate::error::KdvError;
use crate::grid::Grid;

/// Discrete inner product `h Σ u_i v_i`.
pub fn dot(grid: &Grid, u: &[f64], v: &[f64]) -> f64 {
    grid.h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

pub fn h_norm(grid: &Grid, u: &[f64]) -> f64 {
    dot(grid, u, u).sqrt()
}

/// Trapezoidal weights for `n + 1` equally spaced samples with step `dt`.
pub fn trapezoid_weights(samples: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; samples];
    match samples {
        0 => {}
        1 => w[0] = 0.0,
        _ => {
            w[0] = 0.5 * dt;
            w[samples - 1] = 0.5 * dt;
        }
    }
    w
}

/// Derivative at all nodes `0..=N+1` of a vector that includes the boundary values:
/// centered inside, second-order one-sided at both ends.
fn derivative(w: &[f64], h: f64) -> Vec<f64> {
    let m = w.len();
    let mut d = vec![0.0; m];
    d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    for i in 1..m - 1 {
        d[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
    }
    d[m - 1] = (3.0 * w[m - 1] - 4.0 * w[m - 2] + w[m - 3]) / (2.0 * h);
    d
}

/// `‖D^k u‖_h`, with the derivative evaluated on the closed grid (boundary values
/// `u(0) = u(L) = 0`) and integrated by the trapezoidal rule.
pub fn seminorm(u: &[f64], k: usize, grid: &Grid) -> Result<f64, KdvError> {
    grid.check(u)?;
    if k > 3 {
        return Err(KdvError::OrderTooHigh(k));
    }
    if k == 0 {
        return Ok(h_norm(grid, u));
    }
    let mut w = Vec::with_capacity(u.len() + 2);
    w.push(0.0);
    w.extend_from_slice(u);
    w.push(0.0);
    for _ in 0..k {
        w = derivative(&w, grid.h);
    }
    let m = w.len();
    let inner: f64 = w[1..m - 1].iter().map(|x| x * x).sum();
    let ends = 0.5 * (w[0] * w[0] + w[m - 1] * w[m - 1]);
    Ok((grid.h * (inner + ends)).sqrt())
}

/// `(‖D^k u‖²_h + ‖u‖²_h)^{1/2}` for `k <= 3`; for `k = 0` just `‖u‖_h`.
pub fn discrete_norm(u: &[f64], k: usize, grid: &Grid) -> Result<f64, KdvError> {
    let l2 = seminorm(u, 0, grid)?;
    if k == 0 {
        return Ok(l2);
    }
    let d = seminorm(u, k, grid)?;
    Ok((d * d + l2 * l2).sqrt())
}
