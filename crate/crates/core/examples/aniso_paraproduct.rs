//! Apply the anisotropic cone symbol spectrally and compare it with the
//! pointwise product for the constant symbol.

use trilinear_lab::singular_ops::{aniso_apply, symbol_class_estimate, SymbolSpec};
use trilinear_lab::{rng, GridFunction2D};

fn main() -> trilinear_lab::Result<()> {
    let n = 32;
    let mut r = rng::stream(4, &[4]);
    let f1 = GridFunction2D::from_fn(n, |_, _| rng::complex_normal(&mut r))?;
    let f2 = GridFunction2D::from_fn(n, |_, _| rng::complex_normal(&mut r))?;
    let prod = aniso_apply(&SymbolSpec::Constant { value: 1.0 }, &f1, &f2)?;
    println!(
        "constant symbol vs product: {:.2e}",
        prod.max_abs_diff(&f1.zip(&f2, |a, b| a * b))
    );
    let cone = SymbolSpec::Cone { alpha: 1, beta: 2 };
    let out = aniso_apply(&cone, &f1, &f2)?;
    println!("||T_m(f1, f2)||_2 = {:.6}", out.norm_lp(2.0));
    println!(
        "symbol class constant = {:.4}",
        symbol_class_estimate(&cone, -6, 6)?
    );
    Ok(())
}
