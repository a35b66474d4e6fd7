//! Tabulate the smooth windows and print their integrals.

use trilinear_lab::windows::{SampledWindow, WindowKind};

fn main() {
    let kinds = [
        WindowKind::PlateauPhi,
        WindowKind::AnnulusPsi,
        WindowKind::GaussG,
        WindowKind::GaussH,
        WindowKind::DecayTheta,
        WindowKind::MollifierTheta,
        WindowKind::BumpTau,
    ];
    for kind in kinds {
        let w = SampledWindow::tabulate(kind, 4096);
        let (lo, hi) = kind.range();
        println!(
            "{kind:?}: range [{lo}, {hi}], integral {:.10}",
            w.integral()
        );
    }
}
