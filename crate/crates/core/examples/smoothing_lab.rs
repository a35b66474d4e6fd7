//! Sharp/flat splitting, the autocorrelation identity and a sublevel-set fit
//! for an adversarial piecewise-constant pair.

use trilinear_lab::smoothing_lab::{
    adversarial_pair, autocorr_energy, autocorr_energy_shifts, sharp_flat_split, sublevel_fit,
    SharpFlatParams, SublevelBox, SublevelGrid,
};
use trilinear_lab::{rng, GridFunction1D};

fn main() -> trilinear_lab::Result<()> {
    let n = 64;
    let mut r = rng::stream(6, &[7]);
    let g = GridFunction1D::from_fn(n, |_| rng::complex_normal(&mut r))?;
    let a = autocorr_energy(&g, 3.0)?;
    let b = autocorr_energy_shifts(&g, 3.0)?;
    println!("autocorrelation energy: pairs {a:.8}, shifts {b:.8}");
    let prm = SharpFlatParams { r: 4.0, rho: 0.1 };
    let sf = sharp_flat_split(&g, &prm)?;
    println!(
        "sharp windows kept: {} (at most {})",
        sf.selected.len(),
        4.0 / prm.rho
    );
    println!("flat energy: {:.6}", autocorr_energy(&sf.flat, prm.r)?);

    let (alpha, beta) = adversarial_pair(32, 3, &mut r)?;
    let eps: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
    let rep = sublevel_fit(
        &alpha,
        &beta,
        &SublevelBox::default(),
        &eps,
        &SublevelGrid::default(),
    )?;
    for (e, m) in rep.epsilons.iter().zip(&rep.measures) {
        println!("eps {e:.4}: measure {m:.4e}");
    }
    println!(
        "fitted slope {:?}, monotone {}",
        rep.fitted_sigma, rep.monotone
    );
    Ok(())
}
