//! Finite-difference discretization of the linear KdV semigroup on `(0, L)`
//! with `u(0) = u(L) = u_x(L) = 0`, observed through the flux `u_x(t, 0)`.

mod banded;
mod error;
mod evolve;
mod grid;
pub mod io;
mod norms;
pub mod observe;
mod operator;
pub mod smoothing;
mod states;

pub use banded::{BandLu, BandMatrix};
pub use error::KdvError;
pub use evolve::{evolve, evolve_many, EvolveOptions, Scheme, StateTrajectory, Stepper};
pub use grid::{Grid, MIN_NODES};
pub use norms::{discrete_norm, dot, h_norm, seminorm, trapezoid_weights};
pub use operator::{build_operator, BoundaryClosure, DiscreteOperator};
pub use states::{normalize, rough_state, sine_state};
