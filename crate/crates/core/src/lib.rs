//! Interior Backus problem on the unit ball of R^3.
//!
//! Given `g > 0` on the unit sphere close to 1, find `u` harmonic in the
//! ball with `|∇u| = g` on the sphere, as a perturbation `u = x_N + v` of the
//! laminar potential. The linearized problem `Δv = 0`, `∂_{x_N} v = φ` on the
//! sphere, `v = ψ` on the equator is solved exactly on polynomials and,
//! independently, by kernel quadrature; the nonlinear problem is a contraction
//! iteration on `φ`.

pub mod cli;
pub mod disk_poisson;
pub mod error;
pub mod grids;
pub mod harmonic_ext;
pub mod kernels;
pub mod linearized;
pub mod nonlinear;
pub mod norms;
pub mod oracle;
pub mod poly;

pub use error::{BackusError, Result};
