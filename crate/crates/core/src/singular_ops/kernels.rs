use super::{parabolic_sum, spectra};
use crate::error::{param, Result};
use crate::littlewood_paley::{annular_pieces, classify_pair, j_max, FreqClass};
use crate::quadrature::{check_shell, ShellQuadrature};
use crate::torus::{Axis, GridFunction2D};
use crate::windows::annulus_psi;

/// Nodes of `T_j` with the kernel `psi(2^j t) / t` folded into the weights.
pub(crate) fn hilbert_nodes(j: i32, quad: &ShellQuadrature) -> Vec<(f64, f64)> {
    let s = 2f64.powi(j);
    quad.shell(j)
        .into_iter()
        .map(|(t, w)| (t, w * annulus_psi(s * t) / t))
        .collect()
}

/// `T_j(f1, f2)`.
pub fn single_scale(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    j: i32,
    quad: &ShellQuadrature,
) -> Result<GridFunction2D> {
    check_shell(j)?;
    if quad.nodes_per_shell < crate::quadrature::MIN_NODES_PER_SHELL {
        return Err(param(
            "nodes_per_shell",
            format!("{} is below 16", quad.nodes_per_shell),
        ));
    }
    let (a1, a2) = spectra(f1, f2);
    Ok(parabolic_sum(&a1, &a2, &hilbert_nodes(j, quad), f1.n))
}

/// `sum_{j in quad range} T_j(f1, f2)`.
pub fn truncated_t(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    quad: &ShellQuadrature,
) -> Result<GridFunction2D> {
    quad.validate()?;
    let (a1, a2) = spectra(f1, f2);
    let nodes: Vec<(f64, f64)> = quad.scales().flat_map(|j| hilbert_nodes(j, quad)).collect();
    Ok(parabolic_sum(&a1, &a2, &nodes, f1.n))
}

/// Result of a paired component; `empty` flags an empty admissible scale set.
#[derive(Clone, Debug)]
pub struct Component {
    pub value: GridFunction2D,
    pub empty: bool,
}

/// `T^{(k)}(f1, f2) = sum_j T_j(Delta^{(1)}_{j + k1} f1, Delta^{(2)}_{2j + k2} f2)`
/// over the scales `j` of `quad` for which both bands exist on the grid.
pub fn paired_component(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    k: (i64, i64),
    quad: &ShellQuadrature,
) -> Result<Component> {
    quad.validate()?;
    let n = f1.n;
    let top = j_max(n) as i64;
    let p1 = annular_pieces(f1, Axis::X);
    let p2 = annular_pieces(f2, Axis::Y);
    let mut value = GridFunction2D::zeros(n)?;
    let mut empty = true;
    for j in quad.scales() {
        let b = j as i64 + k.0;
        let c = 2 * j as i64 + k.1;
        if (0..=top).contains(&b) && (0..=top).contains(&c) {
            empty = false;
            let (a1, a2) = spectra(&p1[b as usize], &p2[c as usize]);
            value = value.add(&parabolic_sum(&a1, &a2, &hilbert_nodes(j, quad), n));
        }
    }
    Ok(Component { value, empty })
}

/// Smallest `k_window` covering every band pair representable on an
/// `n`-grid for the scales of `quad`.
pub fn required_k_window(n: usize, quad: &ShellQuadrature) -> i64 {
    let top = j_max(n) as i64;
    quad.scales()
        .map(|j| {
            let j = j as i64;
            [j, (top - j).abs(), 2 * j, (top - 2 * j).abs()]
                .into_iter()
                .max()
                .unwrap()
        })
        .max()
        .unwrap_or(0)
}

/// `T^L`, `T^M` or `T^H`: the sum of `paired_component` over offsets of the
/// class with `max(|k1|, |k2|) <= k_window`.
pub fn frequency_component(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    omega: FreqClass,
    quad: &ShellQuadrature,
    k_window: i64,
) -> Result<GridFunction2D> {
    quad.validate()?;
    let n = f1.n;
    let need = required_k_window(n, quad);
    if k_window < need {
        return Err(param(
            "k_window",
            format!("{k_window} leaves pairs unclassified; need {need}"),
        ));
    }
    let top = j_max(n) as i64;
    let p1 = annular_pieces(f1, Axis::X);
    let p2 = annular_pieces(f2, Axis::Y);
    let mut value = GridFunction2D::zeros(n)?;
    for j in quad.scales() {
        let nodes = hilbert_nodes(j, quad);
        let jj = j as i64;
        for b in 0..=top {
            let k1 = b - jj;
            let mut g2: Option<GridFunction2D> = None;
            for c in 0..=top {
                let k2 = c - 2 * jj;
                if classify_pair(k1, k2) == omega && k1.abs().max(k2.abs()) <= k_window {
                    g2 = Some(match g2 {
                        None => p2[c as usize].clone(),
                        Some(g) => g.add(&p2[c as usize]),
                    });
                }
            }
            if let Some(g2) = g2 {
                let (a1, a2) = spectra(&p1[b as usize], &g2);
                value = value.add(&parabolic_sum(&a1, &a2, &nodes, n));
            }
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::torus::{phase, Spectrum2D};
    use num_complex::Complex64;

    fn band_limited(n: usize, radius: i64, seed: u64, skip_zero: Option<Axis>) -> GridFunction2D {
        let mut r = rng::stream(seed, &[31]);
        let mut s = Spectrum2D::zeros(n).unwrap();
        for a in -radius..=radius {
            for b in -radius..=radius {
                let z = rng::complex_normal(&mut r);
                let skip = match skip_zero {
                    Some(Axis::X) => a == 0,
                    Some(Axis::Y) => b == 0,
                    None => false,
                };
                if !skip {
                    s.set(a, b, z);
                }
            }
        }
        s.inverse()
    }

    // Adaptive Simpson on a smooth integrand.
    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            d: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if d > 40 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, d + 1)
                    + rec(f, m, b, fm, frm, fb, right, tol / 2.0, d + 1)
            }
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        rec(
            f,
            a,
            b,
            fa,
            fm,
            fb,
            (b - a) / 6.0 * (fa + 4.0 * fm + fb),
            tol,
            0,
        )
    }

    #[test]
    fn constants_give_zero() {
        let one = GridFunction2D::constant(16, 1.0).unwrap();
        let q = ShellQuadrature::default();
        let t = truncated_t(&one, &one, &q).unwrap();
        assert!(t.norm_lp(f64::INFINITY) < 1e-14);
        let t3 = single_scale(&one, &one, 3, &q).unwrap();
        assert!(t3.norm_lp(f64::INFINITY) < 1e-14);
    }

    #[test]
    fn single_mode_matches_scalar_integral() {
        let n = 16;
        let f1 = GridFunction2D::from_fn(n, |x, _| phase(x)).unwrap();
        let one = GridFunction2D::constant(n, 1.0).unwrap();
        let q = ShellQuadrature::new(128, 3, 3).unwrap();
        let t = single_scale(&f1, &one, 3, &q).unwrap();
        // c = int e^{2 pi i t} psi(8t)/t dt = 2i int_{1/16}^{1/4} sin(2 pi t) psi(8t)/t dt
        let im = 2.0
            * adaptive(
                &|t: f64| (2.0 * std::f64::consts::PI * t).sin() * annulus_psi(8.0 * t) / t,
                1.0 / 16.0,
                0.25,
                1e-14,
            );
        let c = Complex64::new(0.0, im);
        let want = f1.map(|z| z * c);
        assert!(t.max_abs_diff(&want) < 1e-10, "{}", t.max_abs_diff(&want));
    }

    #[test]
    fn refinement_oracle() {
        let n = 32;
        let f1 = band_limited(n, 4, 1, None);
        let f2 = band_limited(n, 4, 2, None);
        let q = ShellQuadrature {
            j_max: 4,
            ..ShellQuadrature::default()
        };
        let a = truncated_t(&f1, &f2, &q).unwrap();
        let b = truncated_t(&f1, &f2, &q.refined(4)).unwrap();
        let rel = a.sub(&b).norm_lp(2.0) / b.norm_lp(2.0);
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn row_constant_f2_reduces_to_one_dimensional_transform() {
        let n = 32;
        let g = band_limited(n, 6, 3, None).fiber_x(0);
        let f1 = GridFunction2D::from_fn(n, |x, _| g.values[(x * n as f64).round() as usize % n])
            .unwrap();
        let one = GridFunction2D::constant(n, 1.0).unwrap();
        let q = ShellQuadrature::new(32, 3, 4).unwrap();
        let t = truncated_t(&f1, &one, &q).unwrap();
        // Direct 1D quadrature through the analytic trigonometric interpolant.
        let spec = g.forward();
        let interp = |x: f64| -> Complex64 {
            (0..n)
                .map(|k| spec.coeffs[k] * phase(crate::torus::freq(k, n) as f64 * x))
                .sum()
        };
        for i in (0..n).step_by(5) {
            let x = i as f64 / n as f64;
            let mut want = Complex64::new(0.0, 0.0);
            for j in q.scales() {
                for (t, w) in q.shell(j) {
                    want += w * annulus_psi(2f64.powi(j) * t) / t * interp(x + t);
                }
            }
            for jy in 0..n {
                assert!((t.at(i, jy) - want).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn recombination_of_classes() {
        let n = 32;
        let f1 = band_limited(n, 15, 4, Some(Axis::X));
        let f2 = band_limited(n, 15, 5, Some(Axis::Y));
        let q = ShellQuadrature::new(16, 3, 4).unwrap();
        let kw = required_k_window(n, &q);
        let mut sum = GridFunction2D::zeros(n).unwrap();
        for om in [FreqClass::Low, FreqClass::Mixed, FreqClass::High] {
            sum = sum.add(&frequency_component(&f1, &f2, om, &q, kw).unwrap());
        }
        let t = truncated_t(&f1, &f2, &q).unwrap();
        assert!(sum.sub(&t).norm_lp(2.0) <= 1e-6 * t.norm_lp(2.0));
        assert!(frequency_component(&f1, &f2, FreqClass::Low, &q, kw - 1).is_err());

        let mut psum = GridFunction2D::zeros(n).unwrap();
        for k1 in -kw..=kw {
            for k2 in -kw..=kw {
                psum = psum.add(&paired_component(&f1, &f2, (k1, k2), &q).unwrap().value);
            }
        }
        assert!(psum.sub(&t).norm_lp(2.0) <= 1e-6 * t.norm_lp(2.0));
    }

    #[test]
    fn paired_component_edge_cases() {
        let n = 32;
        let q = ShellQuadrature::new(16, 3, 4).unwrap();
        let one = GridFunction2D::constant(n, 1.0).unwrap();
        let f = band_limited(n, 8, 6, None);
        for k in [(0, 0), (1, -2), (-1, -3)] {
            assert!(
                paired_component(&one, &f, k, &q)
                    .unwrap()
                    .value
                    .norm_lp(f64::INFINITY)
                    < 1e-14
            );
            assert!(
                paired_component(&f, &one, k, &q)
                    .unwrap()
                    .value
                    .norm_lp(f64::INFINITY)
                    < 1e-14
            );
        }
        assert!(paired_component(&f, &f, (20, 0), &q).unwrap().empty);
        // Modes at xi1 = 12 (bands 3, 4) and xi2 = 3 (bands 1, 2): the single
        // pair (b, c) = (4, 2) at j = 3 is k = (1, -4).
        let f1 = GridFunction2D::from_fn(n, |x, _| phase(12.0 * x)).unwrap();
        let f2 = GridFunction2D::from_fn(n, |_, y| phase(3.0 * y)).unwrap();
        let got = paired_component(&f1, &f2, (1, -4), &q).unwrap();
        let d1 = crate::littlewood_paley::apply_band(
            &f1,
            crate::littlewood_paley::BandSpec {
                axis: Axis::X,
                j: 4,
                kind: crate::littlewood_paley::BandKind::Annulus,
            },
        )
        .unwrap();
        let d2 = crate::littlewood_paley::apply_band(
            &f2,
            crate::littlewood_paley::BandSpec {
                axis: Axis::Y,
                j: 2,
                kind: crate::littlewood_paley::BandKind::Annulus,
            },
        )
        .unwrap();
        let want = single_scale(&d1, &d2, 3, &q).unwrap();
        assert!(got.value.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn low_frequency_inputs_are_all_low() {
        let n = 32;
        let q = ShellQuadrature::new(16, 3, 4).unwrap();
        let kw = required_k_window(n, &q);
        let f1 = band_limited(n, 7, 7, None);
        let f2 = band_limited(n, 15, 8, None);
        let m = frequency_component(&f1, &f2, FreqClass::Mixed, &q, kw).unwrap();
        let h = frequency_component(&f1, &f2, FreqClass::High, &q, kw).unwrap();
        // Zero up to FFT round-off in the empty bands.
        let scale = f1.norm_lp(f64::INFINITY) * f2.norm_lp(f64::INFINITY);
        assert!(m.norm_lp(f64::INFINITY) < 1e-13 * scale);
        assert!(h.norm_lp(f64::INFINITY) < 1e-13 * scale);
    }

    #[test]
    fn high_frequency_pair_is_high() {
        let n = 64;
        let q = ShellQuadrature::new(16, 3, 3).unwrap();
        let kw = required_k_window(n, &q);
        let f1 = GridFunction2D::from_fn(n, |x, y| phase(24.0 * x + 2.0 * y) + phase(-20.0 * x))
            .unwrap();
        let f2 = GridFunction2D::from_fn(n, |x, y| phase(x + 28.0 * y) + phase(-17.0 * y)).unwrap();
        let l = frequency_component(&f1, &f2, FreqClass::Low, &q, kw)
            .unwrap()
            .norm_lp(2.0);
        let m = frequency_component(&f1, &f2, FreqClass::Mixed, &q, kw)
            .unwrap()
            .norm_lp(2.0);
        let h = frequency_component(&f1, &f2, FreqClass::High, &q, kw)
            .unwrap()
            .norm_lp(2.0);
        assert!(h > 0.0);
        assert!(l + m < 0.05 * h);
    }
}
