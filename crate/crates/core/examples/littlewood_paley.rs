//! Split a random function into annular pieces along one axis and check
//! that the pieces telescope back to the low-pass projections.

use trilinear_lab::littlewood_paley::{annular_pieces, j_max, telescoping_residual};
use trilinear_lab::{rng, Axis, GridFunction2D};

fn main() -> trilinear_lab::Result<()> {
    let n = 64;
    let mut r = rng::stream(1, &[1]);
    let f = GridFunction2D::from_fn(n, |_, _| rng::complex_normal(&mut r))?;
    for (j, piece) in annular_pieces(&f, Axis::X).iter().enumerate() {
        println!("||Delta_{j} f||_2 = {:.6}", piece.norm_lp(2.0));
    }
    let res = telescoping_residual(&f, Axis::X, 1, j_max(n))?;
    println!("telescoping residual = {res:.2e}");
    Ok(())
}
