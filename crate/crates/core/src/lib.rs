//! Numerical laboratory for radial solutions of `-Δu + u = u^p` on a ball
//! with Neumann boundary, in the supercritical range `p > (N+2)/(N-2)`.
//!
//! The crate builds the singular solution from its origin asymptotics,
//! shoots regular solutions, locates the exponents at which a critical
//! radius meets a prescribed ball radius and counts negative eigenvalues of
//! the radial linearized operator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponent;
pub mod ode;
pub mod params;
pub mod shooting;
pub mod singular;
pub mod spectral;

pub use error::{Error, Result};
