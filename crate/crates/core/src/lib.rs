//! Explicit observability constants for the linearized KdV equation on `(0, L)`
//! with Dirichlet data at both ends and a Neumann condition on the right.
//!
//! The chain runs Sobolev constants → flow constants and covering numbers →
//! the spectral radius bound `γ` → the flux threshold `ε₀`, all in
//! [`XReal`] arithmetic because the final constant is a power tower.

pub mod critical;
pub mod epsilon;
mod error;
pub mod flow;
pub mod gamma;
pub mod margin;
mod mantissa;
pub mod sobolev;
mod xreal;

pub use error::CoreError;
pub use mantissa::{Hp, Mantissa, HP_BITS};
pub use xreal::{XReal, XRealError, NORMAL_MAX, NORMAL_MIN};
