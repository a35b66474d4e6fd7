//! Randomized invariants across modules.

use proptest::prelude::*;
use trilinear_lab::littlewood_paley::{
    apply_band, classify_pair, j_max, multiplier, BandKind, BandSpec, FreqClass,
};
use trilinear_lab::paraproduct::{random_convex_tree, tree_leaves, DyadicGeometry};
use trilinear_lab::patterns::{
    count_integral, count_profile, dichotomy_run, lower_bound_check, martingale_avg,
    pattern_search, BitmapSet, DichotomyThresholds,
};
use trilinear_lab::quadrature::ShellQuadrature;
use trilinear_lab::rng;
use trilinear_lab::singular_ops::{maximal, truncated_t};
use trilinear_lab::smoothing_lab::{
    autocorr_energy, autocorr_energy_shifts, sharp_flat_split, structure_split, sublevel_fit,
    SharpFlatParams, SublevelBox, SublevelGrid,
};
use trilinear_lab::{Axis, Complex64, GridFunction1D, GridFunction2D};

fn size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(16), Just(32)]
}

fn complex_grid(n: usize, seed: u64) -> GridFunction2D {
    let mut r = rng::stream(seed, &[1]);
    GridFunction2D::from_fn(n, |_, _| rng::complex_normal(&mut r)).unwrap()
}

fn unit_grid(n: usize, seed: u64) -> GridFunction2D {
    let mut r = rng::stream(seed, &[2]);
    GridFunction2D::from_real_fn(n, |_, _| rng::uniform(&mut r, 0.0, 1.0)).unwrap()
}

fn line(n: usize, seed: u64) -> GridFunction1D {
    let mut r = rng::stream(seed, &[3]);
    GridFunction1D::from_fn(n, |_| rng::complex_normal(&mut r)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_and_round_trip(n in size(), seed in any::<u64>()) {
        let f = complex_grid(n, seed);
        let s = f.forward();
        let e = f.norm_lp(2.0).powi(2);
        prop_assert!((s.energy() - e).abs() <= 1e-12 * e);
        prop_assert!(s.inverse().max_abs_diff(&f) <= 1e-12 * f.norm_lp(f64::INFINITY));
    }

    #[test]
    fn shifts_compose(n in size(), seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let f = complex_grid(n, seed);
        for axis in [Axis::X, Axis::Y] {
            let a = f.shift(s, axis).shift(t, axis);
            let b = f.shift(s + t, axis);
            prop_assert!(a.max_abs_diff(&b) <= 1e-12 * f.norm_lp(1.0).max(1.0) * n as f64);
        }
    }

    #[test]
    fn zero_difference_is_modulus_squared(n in size(), seed in any::<u64>()) {
        let f = complex_grid(n, seed);
        let d = f.diff(0.0, Axis::X);
        let m = f.map(|z| Complex64::new(z.norm_sqr(), 0.0));
        prop_assert!(d.max_abs_diff(&m) <= 1e-12 * m.norm_lp(f64::INFINITY));
    }

    #[test]
    fn multipliers_partition(xi in 1i64..4096, a in -1i32..2) {
        let l = (xi as f64).log2().floor() as i32;
        let b = l + 3;
        let s: f64 = (a.max(0)..=b).map(|j| multiplier(BandKind::Annulus, j, xi)).sum();
        let lo = if a <= 0 { 0.0 } else { multiplier(BandKind::Lowpass, a - 1, xi) };
        prop_assert!((s + lo - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bands_are_idempotent_on_lowpass(n in size(), seed in any::<u64>(), j in 0i32..3) {
        let f = complex_grid(n, seed);
        let j = j.min(j_max(n) - 2);
        let band = BandSpec { axis: Axis::Y, j, kind: BandKind::Annulus };
        let low = BandSpec { axis: Axis::Y, j: j + 2, kind: BandKind::Lowpass };
        let once = apply_band(&f, band).unwrap();
        // phi_{j+2} = 1 on the support of psi_j.
        let twice = apply_band(&once, low).unwrap();
        prop_assert!(twice.max_abs_diff(&once) <= 1e-12 * f.norm_lp(f64::INFINITY));
    }

    #[test]
    fn pair_classes_are_exclusive(k1 in -512i64..=512, k2 in -512i64..=512) {
        let low = k1.max(k2) <= 0;
        let near = (k1 - k2).abs() <= 100;
        let hits = [
            classify_pair(k1, k2) == FreqClass::Low,
            classify_pair(k1, k2) == FreqClass::High,
            classify_pair(k1, k2) == FreqClass::Mixed,
        ];
        prop_assert_eq!(hits, [low, !low && near, !low && !near]);
    }

    #[test]
    fn kernels_vanish_on_constants(c in 0.1f64..3.0) {
        let f = GridFunction2D::constant(16, c).unwrap();
        let t = truncated_t(&f, &f, &ShellQuadrature::default()).unwrap();
        prop_assert!(t.norm_lp(f64::INFINITY) <= 1e-14 * c * c * 100.0);
        let m = maximal(&f, &f, &ShellQuadrature::default()).unwrap();
        prop_assert!(m.norm_lp(f64::INFINITY) > 0.0);
    }

    #[test]
    fn autocorrelation_forms_agree(n in size(), seed in any::<u64>(), r in 0.0f64..8.0) {
        let g = line(n, seed);
        let a = autocorr_energy(&g, r).unwrap();
        let b = autocorr_energy_shifts(&g, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn structure_split_is_orthogonal(n in size(), seed in any::<u64>(), rho in 0.05f64..0.95) {
        let g = line(n, seed);
        let s = structure_split(&g, 2.0, rho).unwrap();
        let inner: Complex64 = s.g.values.iter().zip(&s.h.values).map(|(a, b)| a * b.conj()).sum();
        let e = g.norm_lp(2.0).powi(2);
        prop_assert!(inner.norm() / n as f64 <= 1e-12 * e);
        prop_assert!((s.g.norm_lp(2.0).powi(2) + s.h.norm_lp(2.0).powi(2) - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn sharp_flat_reconstructs(n in size(), seed in any::<u64>(), rho in 0.05f64..0.95, r in 1.0f64..4.0) {
        let g = line(n, seed);
        let sf = sharp_flat_split(&g, &SharpFlatParams { r, rho }).unwrap();
        prop_assert!(sf.selected.len() as f64 <= 4.0 / rho);
        let sup = g.norm_lp(f64::INFINITY);
        for i in 0..n {
            prop_assert!((sf.sharp.values[i] + sf.flat.values[i] - g.values[i]).norm() <= 1e-12 * sup);
        }
    }

    #[test]
    fn sublevel_measures_are_monotone(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[4]);
        let a = GridFunction2D::from_real_fn(8, |_, _| rng::uniform(&mut r, -2.0, 2.0)).unwrap();
        let b = GridFunction2D::from_real_fn(8, |_, _| rng::uniform(&mut r, -2.0, 2.0)).unwrap();
        let k = SublevelBox::default();
        let eps: Vec<f64> = (0..6).map(|j| 2f64.powi(-j)).collect();
        let grid = SublevelGrid { space_nodes: 8, t_nodes: 64 };
        let rep = sublevel_fit(&a, &b, &k, &eps, &grid).unwrap();
        // Epsilons decrease, so measures must not increase.
        prop_assert!(rep.measures.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.measures.iter().all(|&m| m <= k.volume()));
    }

    #[test]
    fn convex_tree_leaves_tile_the_root(seed in any::<u64>(), p in 0.0f64..0.6) {
        let geo = DyadicGeometry::default();
        let mut r = rng::stream(seed, &[5]);
        let t = random_convex_tree(geo, 0, 2, p, &mut r).unwrap();
        let area: f64 = tree_leaves(&t).unwrap().iter().map(|q| geo.area(q)).sum();
        prop_assert!((area - geo.area(&t.root)).abs() <= 1e-15);
    }

    #[test]
    fn lower_bound_always_holds(n in prop_oneof![Just(8usize), Just(16)], seed in any::<u64>(), power in 1i32..5) {
        let f = unit_grid(n, seed).map(|z| Complex64::new(z.re.powi(power), 0.0));
        for k in 0..=n.trailing_zeros() {
            for l in 0..=n.trailing_zeros() {
                prop_assert!(lower_bound_check(&f, k, l).unwrap().ok);
            }
        }
    }

    #[test]
    fn martingale_is_a_projection(n in size(), seed in any::<u64>(), k in 0u32..4) {
        let f = unit_grid(n, seed);
        for axis in [Axis::X, Axis::Y] {
            let e = martingale_avg(&f, axis, k).unwrap();
            prop_assert!(martingale_avg(&e, axis, k).unwrap().max_abs_diff(&e) <= 1e-15);
            prop_assert!((e.mean() - f.mean()).norm() <= 1e-14);
        }
    }

    #[test]
    fn count_stays_in_unit_interval(n in prop_oneof![Just(8usize), Just(16)], seed in any::<u64>()) {
        let c = count_integral(&unit_grid(n, seed), 2 * n).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn pattern_search_matches_count(n in prop_oneof![Just(8usize), Just(16)], seed in any::<u64>(), d in 0.0f64..0.4, m in 1usize..8) {
        let mut r = rng::stream(seed, &[6]);
        let e = BitmapSet::random(n, d, &mut r).unwrap();
        let m = m.min(n - 1);
        let t_min = m as f64 / n as f64;
        let tail: f64 = count_profile(&e.indicator(), n).unwrap().iter().skip(m).map(|(_, v)| v.re).sum();
        let found = pattern_search(&e, t_min).unwrap();
        prop_assert_eq!(tail > 0.0, found.is_some());
        if let Some(tr) = found {
            prop_assert!(tr.verify(&e) && tr.t >= t_min - 1e-12);
        }
    }

    #[test]
    fn bitmap_pbm_round_trip(n in prop_oneof![Just(4usize), Just(8)], seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[7]);
        let e = BitmapSet::random(n, 0.5, &mut r).unwrap();
        let mut buf = Vec::new();
        e.write_pbm(&mut buf).unwrap();
        prop_assert_eq!(BitmapSet::read_pbm(&buf[..]).unwrap(), e.clone());
        prop_assert_eq!(BitmapSet::from_json_str(&e.to_json_string().unwrap()).unwrap(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dichotomy_respects_energy_budget(seed in any::<u64>(), k0 in 1u32..3) {
        let f = unit_grid(64, seed);
        let run = dichotomy_run(&f, k0, 2, 4, &DichotomyThresholds::default()).unwrap();
        prop_assert!(run.energy_sum <= 4.0 * run.energy_constant * run.norm_sq * (1.0 + 1e-12));
    }
}
