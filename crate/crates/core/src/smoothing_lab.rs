//! Autocorrelation energy, the structure and sharp/flat splits of a line
//! function, sublevel sets of `alpha(x + t, y) - 2 t beta(x, y + t^2)`, and
//! the decay experiment for the localized operator.
//!
//! Frequencies of a line function live on `Z / n`; differences in the
//! autocorrelation energy are taken cyclically so that the pair-sum and the
//! shift-sum forms agree exactly on the grid.

use crate::error::{param, LabError, Result};
use crate::rng::{self, LabRng};
use crate::singular_ops::{local_t, CutoffSpec};
use crate::torus::{freq, slot, Axis, GridFunction1D, GridFunction2D, Spectrum1D, Spectrum2D};
use crate::windows::unit_partition;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

fn cyclic_dist(a: i64, b: i64, n: usize) -> i64 {
    freq(slot(a - b, n), n).abs()
}

fn power(f: &GridFunction1D) -> Vec<f64> {
    let s = f.forward();
    (0..f.n as i64)
        .map(|k| s.get(freq(k as usize, f.n)).norm_sqr())
        .collect()
}

fn check_radius(r: f64) -> Result<i64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(param("R", "must be finite and nonnegative"));
    }
    Ok(r.floor() as i64)
}

/// `sum_{|xi - xi'| <= R} |f^(xi)|^2 |f^(xi')|^2` with cyclic differences.
pub fn autocorr_energy(f: &GridFunction1D, r: f64) -> Result<f64> {
    let rr = check_radius(r)?;
    let n = f.n;
    let p = power(f);
    let mut total = 0.0;
    for a in 0..n {
        if p[a] == 0.0 {
            continue;
        }
        let near: f64 = (0..n)
            .filter(|&b| cyclic_dist(a as i64, b as i64, n) <= rr)
            .map(|b| p[b])
            .sum();
        total += p[a] * near;
    }
    Ok(total)
}

/// The same energy through `D_s f(x) = f(x + s) conj(f(x))`: the mean over
/// grid shifts `s = m / n` of `sum_{|xi| <= R} |(D_s f)^(xi)|^2`.
pub fn autocorr_energy_shifts(f: &GridFunction1D, r: f64) -> Result<f64> {
    let rr = check_radius(r)?;
    let n = f.n;
    let mut total = 0.0;
    for m in 0..n {
        let d: Vec<Complex64> = (0..n)
            .map(|i| f.values[(i + m) % n] * f.values[i].conj())
            .collect();
        let s = GridFunction1D::new(n, d)?.forward();
        total += (0..n)
            .map(|k| freq(k, n))
            .filter(|xi| xi.abs() <= rr)
            .map(|xi| s.get(xi).norm_sqr())
            .sum::<f64>();
    }
    Ok(total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureSplit {
    #[serde(skip)]
    pub g: GridFunction1D,
    #[serde(skip)]
    pub h: GridFunction1D,
    /// Center of the cyclic ball `|xi - c| <= R` carrying `g`.
    pub ball_center: i64,
    pub energy: f64,
    /// Whether `energy >= rho ||f||^4`.
    pub hypothesis: bool,
    /// Whether `||g|| >= rho^{1/2} ||f|| / 2`.
    pub guarantee: bool,
}

/// `f = g + h` with `g^` the restriction of `f^` to the cyclic ball of radius
/// `R` of largest mass, found by scanning every center.
pub fn structure_split(f: &GridFunction1D, r: f64, rho: f64) -> Result<StructureSplit> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(param("rho", "must lie in (0, 1)"));
    }
    let rr = check_radius(r)?;
    let n = f.n;
    let p = power(f);
    let in_ball = |c: i64, xi: i64| cyclic_dist(xi, c, n) <= rr;
    let mut best = (f64::NEG_INFINITY, 0i64);
    for k in 0..n {
        let c = freq(k, n);
        let m: f64 = (0..n).filter(|&b| in_ball(c, b as i64)).map(|b| p[b]).sum();
        if m > best.0 {
            best = (m, c);
        }
    }
    let c = best.1;
    let s = f.forward();
    let (mut gs, mut hs) = (Spectrum1D::zeros(n)?, Spectrum1D::zeros(n)?);
    for k in 0..n {
        let xi = freq(k, n);
        if in_ball(c, xi) {
            gs.set(xi, s.get(xi));
        } else {
            hs.set(xi, s.get(xi));
        }
    }
    let energy = autocorr_energy(f, r)?;
    let f2 = p.iter().sum::<f64>();
    let g = gs.inverse();
    let g2 = gs.energy();
    Ok(StructureSplit {
        hypothesis: energy >= rho * f2 * f2,
        guarantee: g2.sqrt() >= 0.5 * rho.sqrt() * f2.sqrt(),
        g,
        h: hs.inverse(),
        ball_center: c,
        energy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpFlatParams {
    /// Window length `R`.
    pub r: f64,
    /// Mass threshold.
    pub rho: f64,
}

/// `autocorr_energy(f_flat, R) <= SHARP_FLAT_CONSTANT * rho * ||f||^4`.
///
/// Qualifying intervals live on the signed frequency line while the energy
/// uses cyclic balls; a cyclic ball of radius `R` is covered by at most three
/// intervals of length `R` on the line.
pub const SHARP_FLAT_CONSTANT: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpFlat {
    #[serde(skip)]
    pub sharp: GridFunction1D,
    #[serde(skip)]
    pub flat: GridFunction1D,
    /// Window indices `m` of `phi(xi / R + m)` that were kept.
    pub selected: Vec<i64>,
}

impl SharpFlatParams {
    fn validate(&self, n: usize) -> Result<()> {
        if !(self.r >= 1.0 && self.r <= (n / 2) as f64) {
            return Err(param("R", format!("must lie in [1, n/2] = [1, {}]", n / 2)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(param("rho", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Keep the windows `phi(xi / R + m)` whose support meets an interval
/// `[a, a + R]` of the signed frequency line carrying at least `rho ||f||^2`.
/// Every start `a` is scanned.
pub fn sharp_flat_split(f: &GridFunction1D, prm: &SharpFlatParams) -> Result<SharpFlat> {
    let n = f.n;
    prm.validate(n)?;
    let s = f.forward();
    let lo = -(n as i64) / 2;
    let line: Vec<f64> = (lo..lo + n as i64).map(|xi| s.get(xi).norm_sqr()).collect();
    let total: f64 = line.iter().sum();
    let len = prm.r.floor() as usize;
    let mut covered = vec![false; n];
    if total > 0.0 {
        let mut prefix = vec![0.0; n + 1];
        for (k, v) in line.iter().enumerate() {
            prefix[k + 1] = prefix[k] + v;
        }
        for a in 0..n {
            let b = (a + len).min(n - 1);
            if prefix[b + 1] - prefix[a] >= prm.rho * total {
                covered[a..=b].iter_mut().for_each(|c| *c = true);
            }
        }
    }
    let window = |m: i64, xi: i64| unit_partition(xi as f64 / prm.r + m as f64);
    let m_max = (n as f64 / (2.0 * prm.r)).ceil() as i64 + 1;
    let selected: Vec<i64> = (-m_max..=m_max)
        .filter(|&m| (0..n).any(|k| covered[k] && window(m, lo + k as i64) > 0.0))
        .collect();
    let mut sharp = Spectrum1D::zeros(n)?;
    let mut flat = Spectrum1D::zeros(n)?;
    for xi in lo..lo + n as i64 {
        let w: f64 = selected.iter().map(|&m| window(m, xi)).sum();
        sharp.set(xi, s.get(xi) * w);
        flat.set(xi, s.get(xi) * (1.0 - w));
    }
    Ok(SharpFlat {
        sharp: sharp.inverse(),
        flat: flat.inverse(),
        selected,
    })
}

/// Box `x_range x y_range x t_range` with `t > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublevelBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub t: (f64, f64),
}

/// The default `t` range `[1/8, 2]` contains every ratio `u_1 / (2 u_2)` with
/// `u_j` in `[1/2, 2]`.
impl Default for SublevelBox {
    fn default() -> Self {
        Self {
            x: (0.0, 1.0),
            y: (0.0, 1.0),
            t: (0.125, 2.0),
        }
    }
}

impl SublevelBox {
    pub fn volume(&self) -> f64 {
        (self.x.1 - self.x.0) * (self.y.1 - self.y.0) * (self.t.1 - self.t.0)
    }

    fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && b > a;
        if !(ok(self.x) && ok(self.y) && ok(self.t) && self.t.0 > 0.0) {
            return Err(param("K", "needs finite nonempty ranges with t > 0"));
        }
        Ok(())
    }
}

/// Midpoint sampling of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublevelGrid {
    pub space_nodes: usize,
    pub t_nodes: usize,
}

impl Default for SublevelGrid {
    fn default() -> Self {
        Self {
            space_nodes: 32,
            t_nodes: 1024,
        }
    }
}

fn mids(r: (f64, f64), m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| r.0 + (r.1 - r.0) * (k as f64 + 0.5) / m as f64)
        .collect()
}

fn sublevel_values(
    alpha: &GridFunction2D,
    beta: &GridFunction2D,
    k: &SublevelBox,
    grid: &SublevelGrid,
) -> Result<Vec<f64>> {
    k.validate()?;
    if alpha.n != beta.n {
        return Err(LabError::SizeMismatch {
            expected: alpha.n,
            got: beta.n,
        });
    }
    if grid.space_nodes == 0 || grid.t_nodes == 0 {
        return Err(param("grid", "node counts must be positive"));
    }
    if alpha.values.iter().chain(&beta.values).any(|z| z.im != 0.0) {
        return Err(param("alpha/beta", "must be real valued"));
    }
    let (xs, ys, ts) = (
        mids(k.x, grid.space_nodes),
        mids(k.y, grid.space_nodes),
        mids(k.t, grid.t_nodes),
    );
    let mut out = Vec::with_capacity(xs.len() * ys.len() * ts.len());
    for &x in &xs {
        for &y in &ys {
            for &t in &ts {
                out.push(
                    (alpha.nearest(x + t, y).re - 2.0 * t * beta.nearest(x, y + t * t).re).abs(),
                );
            }
        }
    }
    Ok(out)
}

/// `|K|` times the fraction of sample points with
/// `|alpha(x + t, y) - 2 t beta(x, y + t^2)| <= eps`, reading `alpha` and
/// `beta` at the nearest cell.
pub fn sublevel_measure(
    alpha: &GridFunction2D,
    beta: &GridFunction2D,
    k: &SublevelBox,
    eps: f64,
    grid: &SublevelGrid,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(param("eps", "must be positive"));
    }
    let v = sublevel_values(alpha, beta, k, grid)?;
    Ok(k.volume() * v.iter().filter(|&&d| d <= eps).count() as f64 / v.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SublevelReport {
    pub epsilons: Vec<f64>,
    pub measures: Vec<f64>,
    /// Volume of one sample point; a zero measure is below this.
    pub resolution: f64,
    /// Slope of `log measure` against `log eps`, with zero measures raised to
    /// `resolution`. `None` when every measure is zero.
    pub fitted_sigma: Option<f64>,
    pub fitted_c: Option<f64>,
    pub monotone: bool,
}

pub fn sublevel_fit(
    alpha: &GridFunction2D,
    beta: &GridFunction2D,
    k: &SublevelBox,
    epsilons: &[f64],
    grid: &SublevelGrid,
) -> Result<SublevelReport> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(param("eps", "need a nonempty list of positive values"));
    }
    let mut v = sublevel_values(alpha, beta, k, grid)?;
    v.sort_by(f64::total_cmp);
    let vol = k.volume();
    let measures: Vec<f64> = epsilons
        .iter()
        .map(|&e| vol * v.partition_point(|&d| d <= e) as f64 / v.len() as f64)
        .collect();
    let resolution = vol / v.len() as f64;
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(&measures)
        .map(|(e, m)| (e.ln(), m.max(resolution).ln()))
        .collect();
    let distinct = pts.iter().any(|p| p.0 != pts[0].0);
    let (fitted_sigma, fitted_c) = if measures.iter().any(|&m| m > 0.0) && distinct {
        let (s, c) = loglog_fit_ln(&pts);
        (Some(s), Some(c.exp()))
    } else {
        (None, None)
    };
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&a, &b| epsilons[a].total_cmp(&epsilons[b]));
    let monotone = order.windows(2).all(|w| measures[w[0]] <= measures[w[1]]);
    Ok(SublevelReport {
        epsilons: epsilons.to_vec(),
        measures,
        resolution,
        fitted_sigma,
        fitted_c,
        monotone,
    })
}

/// Piecewise-constant pair on random dyadic subdivisions of the square
/// (each cell split with probability 1/2 down to `max_depth`), with values
/// `s u`, `u` uniform in `[1/2, 2]` per cell and one sign `s` shared by the
/// pair, so that `alpha - 2 t beta` can vanish for `t` near `u_1 / (2 u_2)`.
pub fn adversarial_pair(
    n: usize,
    max_depth: u32,
    rng: &mut LabRng,
) -> Result<(GridFunction2D, GridFunction2D)> {
    crate::torus::check_size(n)?;
    if (1usize << max_depth) > n {
        return Err(param("max_depth", "cells must not be finer than the grid"));
    }
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let draw = |rng: &mut LabRng| -> Result<GridFunction2D> {
        let mut f = GridFunction2D::zeros(n)?;
        let mut stack = vec![(0usize, 0usize, n)];
        while let Some((i0, j0, side)) = stack.pop() {
            let depth = (n / side).trailing_zeros();
            if depth < max_depth && rng.gen_bool(0.5) {
                let h = side / 2;
                stack.extend([
                    (i0, j0, h),
                    (i0 + h, j0, h),
                    (i0, j0 + h, h),
                    (i0 + h, j0 + h, h),
                ]);
                continue;
            }
            let v = sign * rng::uniform(rng, 0.5, 2.0);
            for i in i0..i0 + side {
                for j in j0..j0 + side {
                    f.set(i, j, Complex64::new(v, 0.0));
                }
            }
        }
        Ok(f)
    };
    let a = draw(rng)?;
    let b = draw(rng)?;
    Ok((a, b))
}

fn loglog_fit_ln(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares `(slope, intercept)` of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(param("fit", "need at least two positive pairs"));
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.iter().all(|p| p.0 == pts[0].0) {
        return Err(param("fit", "abscissae must not all coincide"));
    }
    Ok(loglog_fit_ln(&pts))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandMode {
    /// `lambda <= |xi_axis| <= 2 lambda`.
    Annulus,
    /// `|xi_axis| <= 2 lambda`.
    Lowpass,
    /// `|xi_axis - lambda| <= width`: a fixed packet carried at `lambda`.
    Modulated { width: u32 },
}

/// Spectral support of a random input: `mode` on `axis` and
/// `|xi_other| <= cross_width` on the other axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandLimitSpec {
    pub axis: Axis,
    pub lambda: f64,
    pub mode: BandMode,
    pub cross_width: u32,
}

impl BandLimitSpec {
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    fn axis_modes(&self, n: usize) -> Result<Vec<i64>> {
        let l = self.lambda;
        if !(l >= 1.0 && 2.0 * l <= (n / 2) as f64) {
            return Err(param(
                "lambda",
                format!("need 1 <= lambda and 2 lambda <= n/2, got {l} at n = {n}"),
            ));
        }
        let h = (n / 2) as i64;
        let keep: Box<dyn Fn(i64) -> bool> = match self.mode {
            BandMode::Annulus => {
                Box::new(move |xi| l <= xi.abs() as f64 && xi.abs() as f64 <= 2.0 * l)
            }
            BandMode::Lowpass => Box::new(move |xi| xi.abs() as f64 <= 2.0 * l),
            BandMode::Modulated { width } => {
                Box::new(move |xi| (xi as f64 - l).abs() <= width as f64)
            }
        };
        let modes: Vec<i64> = (-h..h).filter(|&xi| keep(xi)).collect();
        if modes.is_empty() {
            return Err(param("band", "no grid frequency satisfies the band"));
        }
        Ok(modes)
    }

    /// Complex Gaussian coefficients on the band, normalized to sup norm 1.
    pub fn draw(&self, n: usize, rng: &mut LabRng) -> Result<GridFunction2D> {
        crate::torus::check_size(n)?;
        let on_axis = self.axis_modes(n)?;
        let h = (n / 2) as i64;
        let w = (self.cross_width as i64).min(h - 1);
        let mut s = Spectrum2D::zeros(n)?;
        for &a in &on_axis {
            for b in -w..=w {
                let z = rng::complex_normal(rng);
                match self.axis {
                    Axis::X => s.set(a, b, z),
                    Axis::Y => s.set(b, a, z),
                }
            }
        }
        let f = s.inverse();
        let sup = f.norm_lp(f64::INFINITY);
        Ok(f.scale(1.0 / sup))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub lambdas: Vec<f64>,
    pub medians: Vec<f64>,
    pub maxima: Vec<f64>,
    pub trials: usize,
    /// Slope of `ln median` against `ln lambda`.
    pub slope: f64,
    pub intercept: f64,
    /// `-slope`.
    pub sigma: f64,
}

/// Stream tag for decay trials.
const DECAY_TAG: u64 = 0xDECA;

/// `||T_loc(f1, f2)||_1` over random inputs drawn from the two bands at each
/// `lambda`, with a power-law fit of the medians. The `lambda` fields of the
/// band templates are replaced by the entries of `lambdas`.
///
/// Trial `k` uses the same stream at every `lambda` (common random numbers),
/// so a band that only moves with `lambda` yields modulated copies of the
/// same draw.
pub fn decay_fit(
    n: usize,
    band1: &BandLimitSpec,
    band2: &BandLimitSpec,
    lambdas: &[f64],
    trials: usize,
    zeta: &CutoffSpec,
    seed: u64,
) -> Result<DecayReport> {
    if trials < 10 {
        return Err(param("trials", "at least 10 trials are required"));
    }
    if lambdas.len() < 2 {
        return Err(param("lambdas", "need at least two scales to fit"));
    }
    zeta.validate()?;
    let (mut medians, mut maxima) = (Vec::new(), Vec::new());
    for &l in lambdas {
        let (b1, b2) = (band1.with_lambda(l), band2.with_lambda(l));
        let mut norms = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut r = rng::stream(seed, &[DECAY_TAG, trial as u64]);
            let f1 = b1.draw(n, &mut r)?;
            let f2 = b2.draw(n, &mut r)?;
            norms.push(local_t(&f1, &f2, zeta)?.norm_lp(1.0));
        }
        norms.sort_by(f64::total_cmp);
        let mid = trials / 2;
        let median = if trials % 2 == 1 {
            norms[mid]
        } else {
            0.5 * (norms[mid - 1] + norms[mid])
        };
        medians.push(median);
        maxima.push(*norms.last().unwrap());
    }
    let (slope, intercept) = loglog_fit(lambdas, &medians)?;
    Ok(DecayReport {
        lambdas: lambdas.to_vec(),
        medians,
        maxima,
        trials,
        slope,
        intercept,
        sigma: -slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(n: usize, spec: &[(i64, f64)]) -> GridFunction1D {
        let mut s = Spectrum1D::zeros(n).unwrap();
        for &(xi, a) in spec {
            s.set(xi, Complex64::new(a, 0.0));
        }
        s.inverse()
    }

    fn random_line(n: usize, seed: u64) -> GridFunction1D {
        let mut r = rng::stream(seed, &[121]);
        GridFunction1D::new(n, (0..n).map(|_| rng::complex_normal(&mut r)).collect()).unwrap()
    }

    // Direct double sum over signed frequencies, without the cyclic helper.
    fn pair_oracle(f: &GridFunction1D, r: i64) -> f64 {
        let n = f.n as i64;
        let s = f.forward();
        let mut t = 0.0;
        for a in -n / 2..n / 2 {
            for b in -n / 2..n / 2 {
                let d = (a - b).rem_euclid(n);
                if d.min(n - d) <= r {
                    t += s.get(a).norm_sqr() * s.get(b).norm_sqr();
                }
            }
        }
        t
    }

    #[test]
    fn single_mode_energy_is_norm_fourth_power() {
        let f = modes(32, &[(5, 1.5)]);
        for r in [0.0, 3.0, 40.0] {
            assert!((autocorr_energy(&f, r).unwrap() - 1.5f64.powi(4)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_energy() {
        let (a, b, d) = (1.2, 0.7, 6);
        let f = modes(64, &[(3, a), (3 + d, b)]);
        let base = a.powi(4) + b.powi(4);
        assert!((autocorr_energy(&f, 5.0).unwrap() - base).abs() < 1e-12);
        assert!((autocorr_energy(&f, 6.0).unwrap() - base - 2.0 * a * a * b * b).abs() < 1e-12);
    }

    #[test]
    fn pair_and_shift_forms_agree() {
        for seed in 0..4 {
            let f = random_line(32, seed);
            for r in [0.0, 2.0, 7.5, 16.0] {
                let a = autocorr_energy(&f, r).unwrap();
                let b = autocorr_energy_shifts(&f, r).unwrap();
                let c = pair_oracle(&f, r as i64);
                assert!(
                    (a - b).abs() <= 1e-10 * a && (a - c).abs() <= 1e-12 * a,
                    "{a} {b} {c}"
                );
            }
        }
    }

    #[test]
    fn white_spectrum_energy_fraction() {
        // W = 16 unit modes, R = 2: each mode sees 5 neighbours except at the
        // two ends (3 and 4), total 16 * 5 - 2 * (2 + 1) = 74.
        let f = modes(64, &(0..16).map(|k| (k, 1.0)).collect::<Vec<_>>());
        assert!((autocorr_energy(&f, 2.0).unwrap() - 74.0).abs() < 1e-10);
    }

    #[test]
    fn structure_split_single_mode() {
        let f = modes(32, &[(-4, 2.0)]);
        let s = structure_split(&f, 1.0, 0.9).unwrap();
        assert!(s
            .g
            .values
            .iter()
            .zip(&f.values)
            .all(|(a, b)| (a - b).norm() < 1e-12));
        assert!(s.h.norm_lp(2.0) < 1e-12);
        assert!(s.hypothesis && s.guarantee);
    }

    #[test]
    fn structure_split_white_spectrum_mass() {
        let f = modes(64, &(0..20).map(|k| (k, 1.0)).collect::<Vec<_>>());
        let s = structure_split(&f, 3.0, 0.5).unwrap();
        let g2 = s.g.norm_lp(2.0).powi(2);
        assert!((g2 - 7.0).abs() < 1e-10, "{g2}");
    }

    #[test]
    fn structure_split_bounds_energy() {
        for seed in 0..5 {
            let f = random_line(64, 10 + seed);
            let s = structure_split(&f, 4.0, 0.1).unwrap();
            let f2 = f.norm_lp(2.0).powi(2);
            let (g2, h2) = (s.g.norm_lp(2.0).powi(2), s.h.norm_lp(2.0).powi(2));
            assert!(g2 >= s.energy / f2 * (1.0 - 1e-10));
            assert!((g2 + h2 - f2).abs() < 1e-12 * f2);
            let ip: Complex64 =
                s.g.values
                    .iter()
                    .zip(&s.h.values)
                    .map(|(a, b)| a * b.conj())
                    .sum();
            assert!(ip.norm() < 1e-12 * f2 * 64.0);
        }
    }

    #[test]
    fn sharp_flat_single_mode_and_white_spectrum() {
        let f = modes(64, &[(9, 1.0)]);
        let sf = sharp_flat_split(&f, &SharpFlatParams { r: 4.0, rho: 0.5 }).unwrap();
        assert!(sf.flat.norm_lp(f64::INFINITY) < 1e-12);
        assert!(sf
            .sharp
            .values
            .iter()
            .zip(&f.values)
            .all(|(a, b)| (a - b).norm() < 1e-12));
        // 64 equal modes, intervals of 3 modes carry 3/64 < 0.1.
        let w = modes(64, &(-32..32).map(|k| (k, 1.0)).collect::<Vec<_>>());
        let sf = sharp_flat_split(&w, &SharpFlatParams { r: 2.0, rho: 0.1 }).unwrap();
        assert!(sf.selected.is_empty());
        assert!(sf.sharp.norm_lp(f64::INFINITY) == 0.0);
    }

    #[test]
    fn sharp_flat_properties_on_random_inputs() {
        for seed in 0..6 {
            let n = 64;
            let mut r = rng::stream(seed, &[122]);
            let mut s = Spectrum1D::zeros(n).unwrap();
            for _ in 0..6 {
                let c = r.gen_range(-28i64..28);
                for d in -2..=2 {
                    s.set(c + d, rng::complex_normal(&mut r));
                }
            }
            let f = s.inverse();
            let prm = SharpFlatParams { r: 3.0, rho: 0.15 };
            let sf = sharp_flat_split(&f, &prm).unwrap();
            assert!(sf.selected.len() as f64 <= 4.0 / prm.rho);
            let back = sf.sharp.values.iter().zip(&sf.flat.values).zip(&f.values);
            assert!(
                back.map(|((a, b), c)| (a + b - c).norm())
                    .fold(0.0, f64::max)
                    < 1e-12
            );
            let fs = sf.sharp.forward();
            for k in 0..n as i64 {
                if s.get(k).norm_sqr() == 0.0 {
                    assert!(fs.get(k).norm() < 1e-15);
                }
            }
            let f4 = f.norm_lp(2.0).powi(4);
            assert!(
                autocorr_energy(&sf.flat, prm.r).unwrap()
                    <= SHARP_FLAT_CONSTANT * prm.rho * f4 * (1.0 + 1e-12)
            );
        }
    }

    #[test]
    fn sublevel_examples() {
        let n = 32;
        let c = |v: f64| GridFunction2D::constant(n, v).unwrap();
        let grid = SublevelGrid {
            space_nodes: 8,
            t_nodes: 1024,
        };
        let k = SublevelBox::default();
        assert_eq!(
            sublevel_measure(&c(1.0), &c(0.0), &k, 0.5, &grid).unwrap(),
            0.0
        );
        assert_eq!(
            sublevel_measure(&c(0.0), &c(0.0), &k, 1e-3, &grid).unwrap(),
            k.volume()
        );
        let k = SublevelBox { t: (1.0, 2.0), ..k };
        for e in [0.5, 0.25, 1.0 / 64.0] {
            let m = sublevel_measure(&c(1.0), &c(0.5), &k, e, &grid).unwrap();
            assert!((m - e).abs() < 1e-12, "{e} {m}");
        }
        assert!(sublevel_measure(&c(1.0), &c(0.5), &k, 0.0, &grid).is_err());
    }

    #[test]
    fn sublevel_fit_is_monotone_for_adversarial_pairs() {
        let mut r = rng::stream(2, &[123]);
        let (a, b) = adversarial_pair(32, 3, &mut r).unwrap();
        assert!(a.values.iter().all(|z| (0.5..=2.0).contains(&z.re.abs())));
        let eps: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
        let rep = sublevel_fit(
            &a,
            &b,
            &SublevelBox::default(),
            &eps,
            &SublevelGrid::default(),
        )
        .unwrap();
        assert!(rep.monotone);
        assert!(rep
            .measures
            .iter()
            .all(|&m| m <= SublevelBox::default().volume()));
    }

    #[test]
    fn bands_have_requested_support() {
        let n = 64;
        let mut r = rng::stream(1, &[124]);
        let spec = BandLimitSpec {
            axis: Axis::Y,
            lambda: 4.0,
            mode: BandMode::Annulus,
            cross_width: 1,
        };
        let f = spec.draw(n, &mut r).unwrap();
        assert!((f.norm_lp(f64::INFINITY) - 1.0).abs() < 1e-12);
        let s = f.forward();
        for k1 in -32i64..32 {
            for k2 in -32i64..32 {
                if s.get(k1, k2).norm() > 1e-12 {
                    assert!(k1.abs() <= 1 && (4..=8).contains(&k2.abs()));
                }
            }
        }
        let bad = BandLimitSpec {
            lambda: 20.0,
            ..spec
        };
        assert!(bad.draw(n, &mut r).is_err());
    }

    #[test]
    fn decay_fit_guards() {
        let b = BandLimitSpec {
            axis: Axis::X,
            lambda: 1.0,
            mode: BandMode::Annulus,
            cross_width: 1,
        };
        assert!(decay_fit(32, &b, &b, &[2.0, 4.0], 5, &CutoffSpec::default(), 0).is_err());
        assert!(decay_fit(32, &b, &b, &[2.0], 10, &CutoffSpec::default(), 0).is_err());
    }

    #[test]
    fn loglog_fit_recovers_power() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
        let (s, c) = loglog_fit(&xs, &ys).unwrap();
        assert!((s + 0.7).abs() < 1e-12 && (c.exp() - 3.0).abs() < 1e-12);
    }
}
