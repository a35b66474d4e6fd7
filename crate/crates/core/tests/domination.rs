//! Pointwise domination of a single-scale piece with a high-frequency second
//! input by weighted products of shifted maximal functions, with one constant
//! across random pairs and every kappa.
//!
//! The comparison runs at scale `j = 3` against `Delta^{(2)}_{2j + kappa}`,
//! the parabolic dilate of the unit-scale statement; the right-hand side is a
//! supremum over all dyadic scales and so is unchanged by the dilation.

use trilinear_lab::littlewood_paley::{apply_band, BandKind, BandSpec};
use trilinear_lab::quadrature::ShellQuadrature;
use trilinear_lab::singular_ops::{
    domination_rhs, domination_rhs_on, single_scale, DominationSpec,
};
use trilinear_lab::{rng, Axis, GridFunction2D};

const PAIRS: u64 = 50;
const J: i32 = 3;
const LATTICE: usize = 32;

fn grid_for(kappa: u32) -> usize {
    // Delta_{6 + kappa} needs its lower half below Nyquist.
    if kappa <= 2 {
        512
    } else {
        1024
    }
}

fn max_ratio(kappa: u32, pair: u64) -> f64 {
    let n = grid_for(kappa);
    let mut r = rng::stream(pair, &[0xD0, kappa as u64]);
    let f1 = GridFunction2D::from_real_fn(n, |_, _| rng::normal(&mut r)).unwrap();
    let f2 = GridFunction2D::from_real_fn(n, |_, _| rng::normal(&mut r)).unwrap();
    let band = BandSpec {
        axis: Axis::Y,
        j: 2 * J + kappa as i32,
        kind: BandKind::Annulus,
    };
    let quad = ShellQuadrature::new(32, J, J).unwrap();
    let lhs = single_scale(&f1, &apply_band(&f2, band).unwrap(), J, &quad).unwrap();
    let spec = DominationSpec {
        kappa,
        decay: 2,
        n_window: 3,
    };
    let pts: Vec<usize> = (0..LATTICE)
        .map(|k| k * n / LATTICE + (pair as usize * 7) % (n / LATTICE))
        .collect();
    let rhs = domination_rhs_on(&f1, &f2, &spec, &pts, &pts).unwrap();
    let mut worst: f64 = 0.0;
    for (a, &i) in pts.iter().enumerate() {
        for (b, &j) in pts.iter().enumerate() {
            let v = rhs[a * LATTICE + b];
            assert!(v > 0.0, "bound vanishes at ({i}, {j})");
            worst = worst.max(lhs.at(i, j).norm() / v);
        }
    }
    worst
}

#[test]
fn lattice_evaluation_matches_full_grid() {
    let n = 32;
    let mut r = rng::stream(9, &[0xD1]);
    let f1 = GridFunction2D::from_real_fn(n, |_, _| rng::normal(&mut r)).unwrap();
    let f2 = GridFunction2D::from_real_fn(n, |_, _| rng::normal(&mut r)).unwrap();
    let spec = DominationSpec {
        kappa: 2,
        decay: 2,
        n_window: 2,
    };
    let full = domination_rhs(&f1, &f2, &spec).unwrap();
    let (xs, ys) = ([0usize, 5, 31], [3usize, 17]);
    let part = domination_rhs_on(&f1, &f2, &spec, &xs, &ys).unwrap();
    for (a, &i) in xs.iter().enumerate() {
        for (b, &j) in ys.iter().enumerate() {
            assert!((part[a * ys.len() + b] - full.at(i, j).re).abs() <= 1e-12 * full.at(i, j).re);
        }
    }
}

#[test]
fn one_constant_dominates_all_pairs_and_kappas() {
    let mut global: f64 = 0.0;
    for kappa in 1..=3 {
        let worst = (0..PAIRS).map(|p| max_ratio(kappa, p)).fold(0.0, f64::max);
        println!("kappa {kappa}: max |lhs| / rhs = {worst:.4}");
        global = global.max(worst);
    }
    println!("fitted constant C = {global:.4}");
    assert!(global.is_finite() && global > 0.0);
}
