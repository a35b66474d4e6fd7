//! Periodized one-dimensional kernels sampled on the grid, and the
//! localized maximal function.

use super::dyadic::{DyadicGeometry, DyadicRectangle};
use crate::error::{param, Result};
use crate::torus::{phase, GridFunction2D};
use crate::windows::{decay_theta, decay_theta_primitive, gauss_g, gauss_h};
use num_complex::Complex64;

/// Gaussian tails are dropped beyond 12 standard deviations of `e^{-pi x^2}`.
pub const GAUSS_CUTOFF: f64 = 12.0 / 2.506_628_274_631_000_7;

/// Images of `theta` summed on each side of the period.
pub const THETA_IMAGES: i64 = 64;

fn grid_x(n: usize, i: usize) -> f64 {
    i as f64 / n as f64
}

/// `sum_m s^{-1} k((x_i + m - c) / s)` for a kernel supported in `|u| <= cutoff`.
fn images(n: usize, s: f64, c: f64, cutoff: f64, k: impl Fn(f64) -> f64) -> Vec<f64> {
    let r = cutoff * s;
    (0..n)
        .map(|i| {
            let d = grid_x(n, i) - c;
            let (lo, hi) = ((-r - d).ceil() as i64, (r - d).floor() as i64);
            (lo..=hi).map(|m| k((d + m as f64) / s)).sum::<f64>() / s
        })
        .collect()
}

/// Periodized `g_{s,c}(x) = s^{-1} g((x - c)/s)` on the grid.
pub fn gauss_per(n: usize, s: f64, c: f64) -> Vec<f64> {
    images(n, s, c, GAUSS_CUTOFF, gauss_g)
}

/// Periodized `h_{s,c}` with `h = g'`.
pub fn gauss_h_per(n: usize, s: f64, c: f64) -> Vec<f64> {
    images(n, s, c, GAUSS_CUTOFF, gauss_h)
}

/// Periodized `theta_{s,c}` with `THETA_IMAGES` images on each side.
pub fn theta_per(n: usize, s: f64, c: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let d = grid_x(n, i) - c;
            (-THETA_IMAGES..=THETA_IMAGES)
                .map(|m| decay_theta((d + m as f64) / s))
                .sum::<f64>()
                / s
        })
        .collect()
}

/// `int_{cell_i} theta_{s,c}` over the cells `[i/n, (i+1)/n)`, periodized.
pub fn theta_cell_weights(n: usize, s: f64, c: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let (a, b) = (grid_x(n, i) - c, grid_x(n, i + 1) - c);
            (-THETA_IMAGES..=THETA_IMAGES)
                .map(|m| {
                    decay_theta_primitive((b + m as f64) / s)
                        - decay_theta_primitive((a + m as f64) / s)
                })
                .sum()
        })
        .collect()
}

/// Periodization of `s^{-1} F((x - c)/s)` from the transform `F^`, which
/// must vanish outside `|xi| <= support`:
/// `sum_k F^(s k) e(k (x - c))`.
pub fn fourier_per(
    n: usize,
    s: f64,
    c: f64,
    support: f64,
    fhat: impl Fn(f64) -> Complex64,
) -> Vec<Complex64> {
    let kmax = (support / s).floor() as i64;
    let coeffs: Vec<(i64, Complex64)> = (-kmax..=kmax)
        .map(|k| (k, fhat(s * k as f64)))
        .filter(|(_, v)| v.norm_sqr() > 0.0)
        .collect();
    (0..n)
        .map(|i| {
            let x = grid_x(n, i) - c;
            coeffs.iter().map(|&(k, v)| v * phase(k as f64 * x)).sum()
        })
        .collect()
}

/// `M_Q(f) = sup_Q (|f|^2 * (theta_{l^a} (x) theta_{l^b}))(c(Q))^{1/2}`, with
/// `f` read as constant on grid cells and the kernel integrated exactly.
pub fn local_max(
    f: &GridFunction2D,
    geometry: &DyadicGeometry,
    q: &[DyadicRectangle],
) -> Result<f64> {
    if q.is_empty() {
        return Err(param("q", "collection must be nonempty"));
    }
    let n = f.n;
    let mut best = 0.0f64;
    for r in q {
        geometry.check(r)?;
        let l = geometry.ell(r);
        let (cx, cy) = geometry.center(r);
        let wx = theta_cell_weights(n, l.powi(geometry.alpha as i32), cx);
        let wy = theta_cell_weights(n, l.powi(geometry.beta as i32), cy);
        let mut acc = 0.0;
        for (i, a) in wx.iter().enumerate() {
            let row: f64 = wy
                .iter()
                .enumerate()
                .map(|(j, b)| f.at(i, j).norm_sqr() * b)
                .sum();
            acc += a * row;
        }
        best = best.max(acc.sqrt());
    }
    Ok(best)
}

/// Both sides of the Cauchy-Schwarz bound for nonnegative inputs at one
/// `(p, q, t)`: the four-function integral against
/// `theta_{t^a,p}(x) theta_{t^a,p}(x') theta_{t^b,q}(y) theta_{t^b,q}(y')`,
/// and `prod_j (f_j^2 * (theta_{t^a} (x) theta_{t^b}))(p, q)^{1/2}`.
pub fn theta_kernel_check(
    fs: [&GridFunction2D; 4],
    geometry: &DyadicGeometry,
    p: f64,
    q: f64,
    t: f64,
) -> Result<(f64, f64)> {
    let n = fs[0].n;
    if fs.iter().any(|f| f.n != n) {
        return Err(param("fs", "grid sizes differ"));
    }
    if fs
        .iter()
        .any(|f| f.values.iter().any(|z| z.re < 0.0 || z.im != 0.0))
    {
        return Err(param("fs", "inputs must be real and nonnegative"));
    }
    if !(t > 0.0) {
        return Err(param("t", "must be positive"));
    }
    let tx = theta_per(n, t.powi(geometry.alpha as i32), p);
    let ty = theta_per(n, t.powi(geometry.beta as i32), q);
    let f = |j: usize, x: usize, y: usize| fs[j].at(x, y).re;
    // int f1(x',y) f2(x,y') f3(x,y) f4(x',y') = sum_{y,y'} ty ty' A(y,y') B(y,y')
    let mut lhs = 0.0;
    for y in 0..n {
        for yp in 0..n {
            let a: f64 = (0..n).map(|x| f(1, x, yp) * f(2, x, y) * tx[x]).sum();
            let b: f64 = (0..n).map(|xp| f(0, xp, y) * f(3, xp, yp) * tx[xp]).sum();
            lhs += ty[y] * ty[yp] * a * b;
        }
    }
    lhs /= (n as f64).powi(4);
    let mut rhs = 1.0;
    for j in 0..4 {
        let mut s = 0.0;
        for x in 0..n {
            for y in 0..n {
                s += f(j, x, y).powi(2) * tx[x] * ty[y];
            }
        }
        rhs *= (s / (n * n) as f64).sqrt();
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn periodized_gaussians_have_unit_mass() {
        // For s n large the grid sum of the periodization is its mean.
        let n = 64;
        for &(s, c) in &[(0.3, 0.1), (1.7, 0.93)] {
            let g = gauss_per(n, s, c);
            assert!((g.iter().sum::<f64>() / n as f64 - 1.0).abs() < 1e-12);
            let h = gauss_h_per(n, s, c);
            assert!((h.iter().sum::<f64>() / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_sum_matches_images() {
        // The transform of g is g itself; support cut where it is negligible.
        let n = 32;
        let (s, c) = (0.15, 0.4);
        let a = gauss_per(n, s, c);
        let b = fourier_per(n, s, c, 8.0, |xi| Complex64::new(gauss_g(xi), 0.0));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y.re).abs() < 1e-12 && y.im.abs() < 1e-12);
        }
    }

    #[test]
    fn local_max_of_constants_is_theta_mass() {
        let f = GridFunction2D::constant(16, 1.0).unwrap();
        let geo = DyadicGeometry::default();
        let rs = geo.all_rectangles(-2, 0).unwrap();
        let m = local_max(&f, &geo, &rs).unwrap();
        assert!((m - 2.0 / 9.0).abs() < 1e-14);
        assert_eq!(
            local_max(&GridFunction2D::zeros(16).unwrap(), &geo, &rs).unwrap(),
            0.0
        );
        assert!(local_max(&f, &geo, &[]).is_err());
    }

    #[test]
    fn distant_indicator_is_controlled_by_theta_tail() {
        let n = 64;
        let geo = DyadicGeometry::default();
        let q = DyadicRectangle {
            k: -3,
            i1: 0,
            i2: 0,
        };
        let (cx, _) = geo.center(&q);
        // Indicator of the column block x in [1/2, 5/8): periodic x-distance
        // from the center is at least d.
        let f = GridFunction2D::from_real_fn(
            n,
            |x, _| if (0.5..0.625).contains(&x) { 1.0 } else { 0.0 },
        )
        .unwrap();
        let d = 0.5 - cx;
        let s = geo.ell(&q);
        let bound = ((2.0 / 9.0) * (2.0 / 9.0) * (1.0 + d / s).powi(-9)).sqrt();
        let m = local_max(&f, &geo, &[q]).unwrap();
        assert!(m > 0.0 && m <= bound, "{m} {bound}");
    }

    #[test]
    fn cauchy_schwarz_bound_holds() {
        let geo = DyadicGeometry::default();
        let mut r = rng::stream(9, &[91]);
        for _ in 0..10 {
            let fs: Vec<GridFunction2D> = (0..4)
                .map(|_| {
                    GridFunction2D::from_real_fn(8, |_, _| rng::uniform(&mut r, 0.0, 1.0)).unwrap()
                })
                .collect();
            let t = rng::uniform(&mut r, 0.1, 1.0);
            let (p, q) = (
                rng::uniform(&mut r, 0.0, 1.0),
                rng::uniform(&mut r, 0.0, 1.0),
            );
            let (lhs, rhs) =
                theta_kernel_check([&fs[0], &fs[1], &fs[2], &fs[3]], &geo, p, q, t).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} {rhs}");
        }
    }
}
