//! The parabolic bilinear operators on the torus.
//!
//! `T_j(f1, f2)(x, y) = int f1(x + t, y) f2(x, y + t^2) psi(2^j t) dt / t`
//! is evaluated by a dyadic-shell midpoint rule in `t` with spectral
//! translations, so off-grid shifts are exact for trigonometric polynomials.

mod aniso;
mod kernels;
mod local;
mod maximal;
mod reductions;

pub use aniso::{aniso_apply, aniso_apply_with, symbol_class_estimate, SymbolSpec};
pub use kernels::{
    frequency_component, paired_component, required_k_window, single_scale, truncated_t, Component,
};
pub use local::{local_form, local_t, CutoffSpec};
pub use maximal::{
    default_s_range, domination_coefficient_sum, domination_rhs, domination_rhs_on,
    domination_sigma, maximal, maximal_scale, shifted_maximal, shifted_maximal_2d, DominationSpec,
};
pub use reductions::{bht_curvature, embed_diagonal, sw_maximal};

use crate::torus::{Axis, AxisSpectrum, GridFunction2D};
use num_complex::Complex64;

/// `sum_t w_t f1(x + t, y) f2(x, y + t^2)` over the given nodes.
pub(crate) fn parabolic_sum(
    a1: &AxisSpectrum,
    a2: &AxisSpectrum,
    nodes: &[(f64, f64)],
    n: usize,
) -> GridFunction2D {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for &(t, w) in nodes {
        let u = a1.shifted(t);
        let v = a2.shifted(t * t);
        for ((o, a), b) in out.iter_mut().zip(&u.values).zip(&v.values) {
            *o += w * a * b;
        }
    }
    GridFunction2D { n, values: out }
}

pub(crate) fn spectra(f1: &GridFunction2D, f2: &GridFunction2D) -> (AxisSpectrum, AxisSpectrum) {
    assert_eq!(f1.n, f2.n, "grid sizes differ");
    (
        AxisSpectrum::new(f1, Axis::X),
        AxisSpectrum::new(f2, Axis::Y),
    )
}
