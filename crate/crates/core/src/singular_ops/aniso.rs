use crate::error::{param, Result};
use crate::littlewood_paley::BandKind;
use crate::quadrature::composite_gl;
use crate::torus::{freq, phase, plan, Axis, AxisSpectrum, GridFunction2D};
use crate::windows::{annulus_psi, cone_profile, gauss_h, ConeProfile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Built-in bilinear Fourier multipliers `m(xi, eta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant {
        value: f64,
    },
    /// `band_x(xi) * band_y(eta)` with Littlewood-Paley multipliers.
    Separable {
        x_kind: BandKind,
        x_j: i32,
        y_kind: BandKind,
        y_j: i32,
    },
    /// `int_0^inf cone(t^a xi) psi(t^b eta) h(t^b eta)^2 dt/t`, which is
    /// invariant under `(xi, eta) -> (s^a xi, s^b eta)`.
    Cone {
        alpha: u32,
        beta: u32,
    },
}

/// Evaluator for a `SymbolSpec` with any tables it needs.
pub struct Symbol {
    spec: SymbolSpec,
    cone: Option<ConeProfile>,
    nodes: Vec<(f64, f64)>,
}

impl SymbolSpec {
    pub fn build(&self) -> Result<Symbol> {
        let (cone, nodes) = match self {
            SymbolSpec::Cone { alpha, beta } => {
                if *alpha == 0 || *beta == 0 {
                    return Err(param("alpha/beta", "must be positive integers"));
                }
                (
                    Some(cone_profile(*alpha as f64, 64)?),
                    composite_gl(0.5, 2.0, 8, 8),
                )
            }
            _ => (None, Vec::new()),
        };
        Ok(Symbol {
            spec: self.clone(),
            cone,
            nodes,
        })
    }

    /// Anisotropy exponents used by the symbol-class check.
    pub fn exponents(&self) -> (f64, f64) {
        match self {
            SymbolSpec::Cone { alpha, beta } => (*alpha as f64, *beta as f64),
            _ => (1.0, 1.0),
        }
    }
}

impl Symbol {
    pub fn eval(&self, xi: f64, eta: f64) -> Complex64 {
        let v = match &self.spec {
            SymbolSpec::Constant { value } => *value,
            SymbolSpec::Separable {
                x_kind,
                x_j,
                y_kind,
                y_j,
            } => band_value(*x_kind, *x_j, xi) * band_value(*y_kind, *y_j, eta),
            SymbolSpec::Cone { alpha, beta } => {
                if eta == 0.0 {
                    0.0
                } else {
                    let cone = self.cone.as_ref().expect("cone table");
                    let r = *alpha as f64 / *beta as f64;
                    let e = eta.abs();
                    self.nodes
                        .iter()
                        .map(|&(u, w)| {
                            let h = gauss_h(u);
                            w * cone.eval((u / e).powf(r) * xi) * annulus_psi(u) * h * h / u
                        })
                        .sum::<f64>()
                        / *beta as f64
                }
            }
        };
        Complex64::new(v, 0.0)
    }
}

fn band_value(kind: BandKind, j: i32, z: f64) -> f64 {
    let s = z * 2f64.powi(-j);
    match kind {
        BandKind::Annulus => annulus_psi(s),
        BandKind::Lowpass => crate::windows::plateau_phi(s),
    }
}

/// Spectral evaluation of `T_m(f1, f2)`.
pub fn aniso_apply(
    m: &SymbolSpec,
    f1: &GridFunction2D,
    f2: &GridFunction2D,
) -> Result<GridFunction2D> {
    let sym = m.build()?;
    aniso_apply_with(|xi, eta| sym.eval(xi as f64, eta as f64), f1, f2)
}

/// `out(x, y) = sum_{xi, eta} m(-xi, -eta) a(xi, y) e(xi x) b(x, eta) e(eta y)`
/// with `a` the x-spectrum of `f1` and `b` the y-spectrum of `f2`; one batch
/// of `n` line transforms per `xi`.
pub fn aniso_apply_with(
    m: impl Fn(i64, i64) -> Complex64,
    f1: &GridFunction2D,
    f2: &GridFunction2D,
) -> Result<GridFunction2D> {
    let n = f1.n;
    if f2.n != n {
        return Err(crate::error::LabError::SizeMismatch {
            expected: n,
            got: f2.n,
        });
    }
    let mut table = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in 0..n {
        for k2 in 0..n {
            let v = m(-freq(k1, n), -freq(k2, n));
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(param(
                    "symbol",
                    format!("non-finite value at ({}, {})", freq(k1, n), freq(k2, n)),
                ));
            }
            table[k1 * n + k2] = v;
        }
    }
    let a = AxisSpectrum::new(f1, Axis::X);
    let b = AxisSpectrum::new(f2, Axis::Y);
    let inv = plan(n, true);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in 0..n {
        let row = &table[k1 * n..(k1 + 1) * n];
        if row.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let xi = freq(k1, n);
        for x in 0..n {
            for k2 in 0..n {
                buf[x * n + k2] = b.coeff(freq(k2, n), x) * row[k2];
            }
        }
        inv.process(&mut buf);
        for x in 0..n {
            let e = phase(xi as f64 * x as f64 / n as f64);
            for y in 0..n {
                out[x * n + y] += a.coeff(xi, y) * e * buf[x * n + y];
            }
        }
    }
    GridFunction2D::new(n, out)
}

/// Finite-difference estimate of the best constant `C` in
/// `|d_xi^k d_eta^l m| <= C (|xi|^{1/a} + |eta|^{1/b})^{-a k - b l}`, `k + l <= 2`,
/// over a log-spaced sample with magnitudes `2^{lo} ..= 2^{hi}`.
pub fn symbol_class_estimate(spec: &SymbolSpec, lo: i32, hi: i32) -> Result<f64> {
    let sym = spec.build()?;
    let (a, b) = spec.exponents();
    let mut c = 0.0f64;
    let mags: Vec<f64> = (lo * 2..=hi * 2)
        .map(|k| 2f64.powf(k as f64 / 2.0))
        .collect();
    let f = |x: f64, y: f64| sym.eval(x, y).re;
    for &mx in &mags {
        for &my in &mags {
            for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let (x, y) = (sx * mx, sy * my);
                let rho = x.abs().powf(1.0 / a) + y.abs().powf(1.0 / b);
                let hx = 1e-3 * rho.powf(a);
                let hy = 1e-3 * rho.powf(b);
                let d00 = f(x, y);
                let d10 = (f(x + hx, y) - f(x - hx, y)) / (2.0 * hx);
                let d01 = (f(x, y + hy) - f(x, y - hy)) / (2.0 * hy);
                let d20 = (f(x + hx, y) - 2.0 * d00 + f(x - hx, y)) / (hx * hx);
                let d02 = (f(x, y + hy) - 2.0 * d00 + f(x, y - hy)) / (hy * hy);
                let d11 = (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy)
                    + f(x - hx, y - hy))
                    / (4.0 * hx * hy);
                for (d, k, l) in [
                    (d00, 0.0, 0.0),
                    (d10, 1.0, 0.0),
                    (d01, 0.0, 1.0),
                    (d20, 2.0, 0.0),
                    (d02, 0.0, 2.0),
                    (d11, 1.0, 1.0),
                ] {
                    c = c.max(d.abs() * rho.powf(a * k + b * l));
                }
            }
        }
    }
    if !c.is_finite() {
        return Err(param("symbol", "symbol estimate is not finite"));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::{apply_band, BandSpec};
    use crate::rng;

    fn random_grid(n: usize, seed: u64) -> GridFunction2D {
        let mut r = rng::stream(seed, &[51]);
        GridFunction2D::new(n, (0..n * n).map(|_| rng::complex_normal(&mut r)).collect()).unwrap()
    }

    // O(n^4) evaluation from direct partial DFTs.
    fn brute_force(sym: &Symbol, f1: &GridFunction2D, f2: &GridFunction2D) -> GridFunction2D {
        let n = f1.n;
        let nf = n as f64;
        let a = |xi: i64, y: usize| -> Complex64 {
            (0..n)
                .map(|x| f1.at(x, y) * phase(-(xi as f64) * x as f64 / nf))
                .sum::<Complex64>()
                / nf
        };
        let b = |x: usize, eta: i64| -> Complex64 {
            (0..n)
                .map(|y| f2.at(x, y) * phase(-(eta as f64) * y as f64 / nf))
                .sum::<Complex64>()
                / nf
        };
        let half = n as i64 / 2;
        GridFunction2D::from_fn(n, |x, y| {
            let (i, j) = ((x * nf).round() as usize, (y * nf).round() as usize);
            let mut acc = Complex64::new(0.0, 0.0);
            for xi in -half..half {
                for eta in -half..half {
                    acc += sym.eval(-xi as f64, -eta as f64)
                        * a(xi, j)
                        * phase(xi as f64 * x)
                        * b(i, eta)
                        * phase(eta as f64 * y);
                }
            }
            acc
        })
        .unwrap()
    }

    #[test]
    fn constant_symbol_is_pointwise_product() {
        let f1 = random_grid(16, 1);
        let f2 = random_grid(16, 2);
        let out = aniso_apply(&SymbolSpec::Constant { value: 1.0 }, &f1, &f2).unwrap();
        let want = f1.zip(&f2, |a, b| a * b);
        assert!(out.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn separable_symbol_factorizes() {
        let f1 = random_grid(32, 3);
        let f2 = random_grid(32, 4);
        let spec = SymbolSpec::Separable {
            x_kind: BandKind::Annulus,
            x_j: 2,
            y_kind: BandKind::Lowpass,
            y_j: 1,
        };
        let out = aniso_apply(&spec, &f1, &f2).unwrap();
        let d = apply_band(
            &f1,
            BandSpec {
                axis: Axis::X,
                j: 2,
                kind: BandKind::Annulus,
            },
        )
        .unwrap();
        let s = apply_band(
            &f2,
            BandSpec {
                axis: Axis::Y,
                j: 1,
                kind: BandKind::Lowpass,
            },
        )
        .unwrap();
        assert!(out.max_abs_diff(&d.zip(&s, |a, b| a * b)) < 1e-12);
    }

    #[test]
    fn cone_symbol_matches_brute_force() {
        let f1 = random_grid(8, 5);
        let f2 = random_grid(8, 6);
        let spec = SymbolSpec::Cone { alpha: 1, beta: 2 };
        let out = aniso_apply(&spec, &f1, &f2).unwrap();
        let want = brute_force(&spec.build().unwrap(), &f1, &f2);
        assert!(out.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn rejects_non_finite_symbols() {
        let f = random_grid(8, 7);
        assert!(aniso_apply_with(|_, _| Complex64::new(f64::NAN, 0.0), &f, &f).is_err());
    }

    #[test]
    fn cone_symbol_is_dilation_invariant_and_matches_definition() {
        let sym = SymbolSpec::Cone { alpha: 1, beta: 2 }.build().unwrap();
        let cone = cone_profile(1.0, 64).unwrap();
        for &(xi, eta) in &[(0.3, 0.8), (-1.2, 2.5), (0.05, -0.4)] {
            let v = sym.eval(xi, eta).re;
            let w = sym.eval(4.0 * xi, 16.0 * eta).re;
            assert!((v - w).abs() < 1e-10 * v.abs().max(1e-3));
            // Trapezoid in log t over the support of psi(t^2 eta).
            let (lo, hi) = ((0.5 / eta.abs()).sqrt().ln(), (2.0 / eta.abs()).sqrt().ln());
            let m = 40000;
            let h = (hi - lo) / m as f64;
            let direct: f64 = (0..=m)
                .map(|k| {
                    let t = (lo + k as f64 * h).exp();
                    let u = t * t * eta;
                    let g = gauss_h(u);
                    let c = if k == 0 || k == m { 0.5 } else { 1.0 };
                    c * cone.eval(t * xi) * annulus_psi(u) * g * g
                })
                .sum::<f64>()
                * h;
            assert!((v - direct).abs() < 1e-6, "{v} {direct}");
        }
    }

    #[test]
    fn symbol_class_constants_are_scale_stable() {
        let spec = SymbolSpec::Cone { alpha: 1, beta: 2 };
        let c1 = symbol_class_estimate(&spec, -3, 3).unwrap();
        let c2 = symbol_class_estimate(&spec, -6, 6).unwrap();
        assert!(c1 > 0.0 && c2 < 1.5 * c1, "{c1} {c2}");
    }
}
