//! One-dimensional Littlewood-Paley projections acting on one axis of a
//! torus grid function, and the frequency-pair classes.
//!
//! `Delta_j` multiplies by `psi(2^{-j} xi)` and `S_j` by `phi(2^{-j} xi)`
//! along the chosen axis. On an `n`-grid the usable scales are
//! `0 ..= log2(n) - 1`; the zero frequency belongs to no annulus and is
//! carried by `S_{-1}`.

use crate::error::{param, Result};
use crate::torus::{Axis, AxisSpectrum, GridFunction2D};
use crate::windows::{annulus_psi, plateau_phi};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandKind {
    /// `Delta_j`.
    Annulus,
    /// `S_j`.
    Lowpass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSpec {
    pub axis: Axis,
    pub j: i32,
    pub kind: BandKind,
}

/// Largest usable scale on an `n`-grid.
pub fn j_max(n: usize) -> i32 {
    n.trailing_zeros() as i32 - 1
}

pub fn multiplier(kind: BandKind, j: i32, xi: i64) -> f64 {
    let z = xi as f64 * 2f64.powi(-j);
    match kind {
        BandKind::Annulus => annulus_psi(z),
        BandKind::Lowpass => plateau_phi(z),
    }
}

pub fn apply_band(f: &GridFunction2D, band: BandSpec) -> Result<GridFunction2D> {
    check_band(f.n, band)?;
    let a = AxisSpectrum::new(f, band.axis);
    Ok(apply_band_partial(&a, band))
}

pub(crate) fn apply_band_partial(a: &AxisSpectrum, band: BandSpec) -> GridFunction2D {
    a.filtered(|xi| Complex64::new(multiplier(band.kind, band.j, xi), 0.0))
}

fn check_band(n: usize, band: BandSpec) -> Result<()> {
    let lo = if band.kind == BandKind::Lowpass {
        -1
    } else {
        0
    };
    if band.j < lo || band.j > j_max(n) {
        return Err(param(
            "j",
            format!("band {} outside [{lo}, {}] for n = {n}", band.j, j_max(n)),
        ));
    }
    Ok(())
}

/// All annular pieces `Delta_0 f, ..., Delta_{log2 n - 1} f` along `axis`.
pub fn annular_pieces(f: &GridFunction2D, axis: Axis) -> Vec<GridFunction2D> {
    let a = AxisSpectrum::new(f, axis);
    (0..=j_max(f.n))
        .map(|j| {
            apply_band_partial(
                &a,
                BandSpec {
                    axis,
                    j,
                    kind: BandKind::Annulus,
                },
            )
        })
        .collect()
}

/// Max deviation of `S_{j_lo - 1} f + sum_{j = j_lo}^{j_hi} Delta_j f` from
/// `S_{j_hi} f`.
pub fn telescoping_residual(f: &GridFunction2D, axis: Axis, j_lo: i32, j_hi: i32) -> Result<f64> {
    let n = f.n;
    check_band(
        n,
        BandSpec {
            axis,
            j: j_lo - 1,
            kind: BandKind::Lowpass,
        },
    )?;
    check_band(
        n,
        BandSpec {
            axis,
            j: j_hi,
            kind: BandKind::Lowpass,
        },
    )?;
    let a = AxisSpectrum::new(f, axis);
    let mut sum = apply_band_partial(
        &a,
        BandSpec {
            axis,
            j: j_lo - 1,
            kind: BandKind::Lowpass,
        },
    );
    for j in j_lo..=j_hi {
        sum = sum.add(&apply_band_partial(
            &a,
            BandSpec {
                axis,
                j,
                kind: BandKind::Annulus,
            },
        ));
    }
    let top = apply_band_partial(
        &a,
        BandSpec {
            axis,
            j: j_hi,
            kind: BandKind::Lowpass,
        },
    );
    Ok(sum.max_abs_diff(&top))
}

/// Classes of scale offsets `k = (k1, k2)` of the paired decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqClass {
    /// `max(k1, k2) <= 0`.
    Low,
    /// `max(k1, k2) > 0` and `|k1 - k2| > 100`.
    Mixed,
    /// `max(k1, k2) > 0` and `|k1 - k2| <= 100`.
    High,
}

/// Separation beyond which a high pair counts as mixed.
pub const MIXED_SEPARATION: i64 = 100;

pub fn classify_pair(k1: i64, k2: i64) -> FreqClass {
    if k1.max(k2) <= 0 {
        FreqClass::Low
    } else if (k1 - k2).abs() <= MIXED_SEPARATION {
        FreqClass::High
    } else {
        FreqClass::Mixed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_grid(n: usize, seed: u64) -> GridFunction2D {
        let mut r = rng::stream(seed, &[21]);
        GridFunction2D::new(n, (0..n * n).map(|_| rng::complex_normal(&mut r)).collect()).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_pair(0, 0), FreqClass::Low);
        assert_eq!(classify_pair(-3, 0), FreqClass::Low);
        assert_eq!(classify_pair(5, 3), FreqClass::High);
        assert_eq!(classify_pair(0, 150), FreqClass::Mixed);
        assert_eq!(classify_pair(1, 101), FreqClass::High);
        assert_eq!(classify_pair(1, 102), FreqClass::Mixed);
    }

    #[test]
    fn annular_pieces_sum_to_mean_free_part() {
        let f = random_grid(32, 1);
        for axis in [Axis::X, Axis::Y] {
            let pieces = annular_pieces(&f, axis);
            let mut sum = GridFunction2D::zeros(32).unwrap();
            for p in &pieces {
                sum = sum.add(p);
            }
            let mean = apply_band(
                &f,
                BandSpec {
                    axis,
                    j: -1,
                    kind: BandKind::Lowpass,
                },
            )
            .unwrap();
            assert!(sum.add(&mean).max_abs_diff(&f) < 1e-12);
        }
    }

    #[test]
    fn telescoping_holds() {
        let f = random_grid(32, 2);
        for (lo, hi) in [(0, 4), (1, 3), (2, 2)] {
            assert!(telescoping_residual(&f, Axis::X, lo, hi).unwrap() < 1e-12);
            assert!(telescoping_residual(&f, Axis::Y, lo, hi).unwrap() < 1e-12);
        }
    }

    #[test]
    fn band_selects_single_mode() {
        // A pure mode at frequency 6 lies in Delta_2 (psi(1.5)) and Delta_3 (psi(0.75)).
        let f = GridFunction2D::from_fn(32, |x, _| crate::torus::phase(6.0 * x)).unwrap();
        let d2 = apply_band(
            &f,
            BandSpec {
                axis: Axis::X,
                j: 2,
                kind: BandKind::Annulus,
            },
        )
        .unwrap();
        let d3 = apply_band(
            &f,
            BandSpec {
                axis: Axis::X,
                j: 3,
                kind: BandKind::Annulus,
            },
        )
        .unwrap();
        let d1 = apply_band(
            &f,
            BandSpec {
                axis: Axis::X,
                j: 1,
                kind: BandKind::Annulus,
            },
        )
        .unwrap();
        assert!(d1.norm_lp(2.0) < 1e-14);
        assert!((d2.norm_lp(2.0) - annulus_psi(1.5)).abs() < 1e-12);
        assert!(d2.add(&d3).max_abs_diff(&f) < 1e-12);
        assert!(apply_band(
            &f,
            BandSpec {
                axis: Axis::X,
                j: 5,
                kind: BandKind::Annulus
            }
        )
        .is_err());
    }
}
