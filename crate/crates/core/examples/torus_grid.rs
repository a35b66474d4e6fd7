//! Sample a function on the torus, transform it, and check Parseval and
//! spectral shifts.

use trilinear_lab::{Axis, GridFunction2D};

fn main() -> trilinear_lab::Result<()> {
    let n = 32;
    let f = GridFunction2D::from_real_fn(n, |x, y| {
        (2.0 * std::f64::consts::PI * (3.0 * x + y)).cos() + 0.5 * (x - 0.5).abs()
    })?;
    let s = f.forward();
    println!("||f||_2^2 = {:.12}", f.norm_lp(2.0).powi(2));
    println!("sum |f^|^2 = {:.12}", s.energy());
    println!("round trip error = {:.2e}", s.inverse().max_abs_diff(&f));
    let a = f.shift(0.1, Axis::X).shift(0.15, Axis::X);
    let b = f.shift(0.25, Axis::X);
    println!("shift composition error = {:.2e}", a.max_abs_diff(&b));
    println!("f^(3, 1) = {:.6}", s.get(3, 1));
    Ok(())
}
