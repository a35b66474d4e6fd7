//! Truncated transform along the parabola, its maximal analogue, the
//! shifted maximal function and the one-dimensional curved transform.

use trilinear_lab::quadrature::ShellQuadrature;
use trilinear_lab::singular_ops::{
    bht_curvature, default_s_range, maximal, shifted_maximal, truncated_t,
};
use trilinear_lab::{rng, Complex64, GridFunction1D, GridFunction2D, Spectrum2D};

fn band_limited(n: usize, seed: u64) -> GridFunction2D {
    let mut r = rng::stream(seed, &[2]);
    let mut s = Spectrum2D::zeros(n).unwrap();
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            s.set(a, b, rng::complex_normal(&mut r));
        }
    }
    s.inverse()
}

fn main() -> trilinear_lab::Result<()> {
    let n = 64;
    let quad = ShellQuadrature::default();
    let (f1, f2) = (band_limited(n, 1), band_limited(n, 2));
    let denom = f1.norm_lp(2.0) * f2.norm_lp(2.0);
    let t = truncated_t(&f1, &f2, &quad)?;
    let m = maximal(&f1, &f2, &quad)?;
    println!(
        "||T(f1, f2)||_1 / (||f1||_2 ||f2||_2) = {:.4}",
        t.norm_lp(1.0) / denom
    );
    println!(
        "||M(f1, f2)||_1 / (||f1||_2 ||f2||_2) = {:.4}",
        m.norm_lp(1.0) / denom
    );

    let one = GridFunction2D::constant(n, 1.0)?;
    println!(
        "T(1, 1) sup = {:.2e}",
        truncated_t(&one, &one, &quad)?.norm_lp(f64::INFINITY)
    );

    let mut r = rng::stream(3, &[3]);
    let g = GridFunction1D::from_fn(256, |_| Complex64::new(rng::normal(&mut r), 0.0))?;
    for sigma in [0.0, 4.0, 64.0] {
        let ms = shifted_maximal(&g, sigma, default_s_range(256))?;
        println!(
            "sigma = {sigma}: ||M_sigma g||_2 / ||g||_2 = {:.4}",
            ms.norm_lp(2.0) / g.norm_lp(2.0)
        );
    }
    let h = bht_curvature(
        &g,
        &GridFunction1D::from_fn(256, |_| Complex64::new(1.0, 0.0))?,
        &quad,
    )?;
    println!(
        "curved transform with g2 = 1: ||.||_2 = {:.4}",
        h.norm_lp(2.0)
    );
    Ok(())
}
