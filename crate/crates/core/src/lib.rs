//! Numerical laboratory for the triangular Hilbert transform along the
//! parabola `(x + t, y + t^2)` on the discrete torus, its Littlewood-Paley
//! pieces, the paraproduct forms on anisotropic dyadic trees, and the
//! corner-pattern counts that go with it.
//!
//! Everything runs on `n x n` grids sampling the unit torus; `n` is a power
//! of two. See the crate `examples/` directory for one runnable program per
//! capability.

pub mod error;
pub mod harness;
pub mod littlewood_paley;
pub mod paraproduct;
pub mod patterns;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod singular_ops;
pub mod smoothing_lab;
pub mod torus;
pub mod windows;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
pub use torus::{Axis, GridFunction1D, GridFunction2D, Spectrum1D, Spectrum2D};
