//! The `t`-integrated model operator built from cone pieces.

use super::dyadic::DyadicGeometry;
use crate::error::{param, Result};
use crate::quadrature::composite_gl;
use crate::torus::{Axis, AxisSpectrum, GridFunction2D};
use crate::windows::{annulus_psi, cone_profile, gauss_h};
use num_complex::Complex64;

/// `int c(t) (f1 filtered in x by cone(t^a xi)) (f2 filtered in y by
/// psi(t^b eta) h(t^b eta)^2) dt/t`, by Gauss-Legendre in `log t` with
/// `panels_per_octave` panels of order 4. Only `t` with
/// `t^b |eta| in [1/2, 2]` for some grid frequency contribute.
pub fn model_operator(
    geometry: &DyadicGeometry,
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    c: &dyn Fn(f64) -> Complex64,
    panels_per_octave: usize,
) -> Result<GridFunction2D> {
    let n = f1.n;
    if f2.n != n {
        return Err(crate::error::LabError::SizeMismatch {
            expected: n,
            got: f2.n,
        });
    }
    if panels_per_octave == 0 {
        return Err(param("panels_per_octave", "must be positive"));
    }
    let (a, b) = (geometry.alpha as i32, geometry.beta as i32);
    let cone = cone_profile(a as f64, 64)?;
    let ln2 = 2f64.ln();
    let (lo, hi) = ((-ln2 - ((n / 2) as f64).ln()) / b as f64, ln2 / b as f64);
    let octaves = ((hi - lo) / ln2).ceil() as usize;
    let sa = AxisSpectrum::new(f1, Axis::X);
    let sb = AxisSpectrum::new(f2, Axis::Y);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for (u, w) in composite_gl(lo, hi, octaves * panels_per_octave, 4) {
        let t = u.exp();
        let ct = c(t);
        if !(ct.norm() <= 1.0) {
            return Err(param(
                "c",
                format!("profile must satisfy |c(t)| <= 1, got {ct} at t = {t}"),
            ));
        }
        let (sx, sy) = (t.powi(a), t.powi(b));
        let p1 = sa.filtered(|xi| cone.eval(sx * xi as f64).into());
        let p2 = sb.filtered(|eta| {
            let z = sy * eta as f64;
            (annulus_psi(z) * gauss_h(z).powi(2)).into()
        });
        for ((o, x), y) in out.iter_mut().zip(&p1.values).zip(&p2.values) {
            *o += w * ct * x * y;
        }
    }
    GridFunction2D::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::singular_ops::{aniso_apply, SymbolSpec};

    fn band_limited(n: usize, radius: i64, seed: u64) -> GridFunction2D {
        let mut r = rng::stream(seed, &[111]);
        let mut s = crate::torus::Spectrum2D::zeros(n).unwrap();
        for a in -radius..=radius {
            for b in -radius..=radius {
                s.set(a, b, rng::complex_normal(&mut r));
            }
        }
        s.inverse()
    }

    #[test]
    fn assembled_symbol_matches_model_operator() {
        let n = 32;
        let geo = DyadicGeometry::default();
        let (f1, f2) = (band_limited(n, 6, 1), band_limited(n, 6, 2));
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let m = model_operator(&geo, &f1, &f2, &one, 16).unwrap();
        let spec = SymbolSpec::Cone {
            alpha: geo.alpha,
            beta: geo.beta,
        };
        let direct = aniso_apply(&spec, &f1, &f2).unwrap();
        let err = m.max_abs_diff(&direct);
        assert!(err <= 1e-3 * direct.norm_lp(f64::INFINITY), "{err}");
    }

    #[test]
    fn rejects_unbounded_profile() {
        let f = GridFunction2D::constant(8, 1.0).unwrap();
        let geo = DyadicGeometry::default();
        assert!(model_operator(&geo, &f, &f, &|_| Complex64::new(2.0, 0.0), 4).is_err());
    }
}
