//! Numerical solver for rational quadratic differentials on the sphere with
//! prescribed simple poles, prescribed polar part at infinity, and purely
//! imaginary cycle periods, together with a tracer for the critical
//! trajectories of the resulting differential.
//!
//! The pipeline: [`descent`] evolves the free polynomial factors of
//! `Q = S^2 D / E` by gradient descent until the period conditions hold,
//! [`periods`] evaluates the contour integrals that drive the descent,
//! [`radical`] fixes a single-valued branch of `sqrt(Q)` off a set of
//! straight branch cuts, and [`trajectories`] traces the critical graph of
//! the converged differential. [`cli`] wraps the whole thing for the binary.

pub mod cli;
pub mod descent;
pub mod error;
pub(crate) mod geom;
pub mod periods;
pub mod poly;
pub mod quad;
pub mod radical;
pub mod trajectories;

pub use error::{Error, Result};
pub use num_complex::Complex64;
