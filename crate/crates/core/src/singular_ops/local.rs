use super::{parabolic_sum, spectra};
use crate::error::{param, Result};
use crate::quadrature::midpoint;
use crate::torus::GridFunction2D;
use crate::windows::{bump_tau, spatial_eta, ETA_COLLAR};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cutoff `zeta(x, y, t) = spatial(x, y) temporal(t)`.
///
/// `spatial` is a tensor of `spatial_eta` bumps scaled to a square of side
/// `side` around `center` (periodic distance). `temporal` is `bump_tau`
/// moved onto `[t_lo, t_hi]`, sampled at `t_nodes` midpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    pub center: (f64, f64),
    pub side: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub t_nodes: usize,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            center: (0.5, 0.5),
            side: 0.5,
            t_lo: 0.25,
            t_hi: 0.5,
            t_nodes: 256,
        }
    }
}

fn periodic_offset(x: f64, c: f64) -> f64 {
    (x - c + 0.5).rem_euclid(1.0) - 0.5
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_lo > 0.0 && self.t_hi > self.t_lo) {
            return Err(param(
                "zeta",
                "temporal support must be an interval inside (0, inf)",
            ));
        }
        if !(self.side > 0.0 && self.side * (1.0 + 2.0 * ETA_COLLAR) <= 1.0) {
            return Err(param("zeta", "spatial support must fit inside one period"));
        }
        if self.t_nodes == 0 {
            return Err(param("zeta", "t_nodes must be positive"));
        }
        Ok(())
    }

    pub fn spatial(&self, x: f64, y: f64) -> f64 {
        spatial_eta(periodic_offset(x, self.center.0) / self.side)
            * spatial_eta(periodic_offset(y, self.center.1) / self.side)
    }

    pub fn temporal(&self, t: f64) -> f64 {
        bump_tau(0.5 + 1.5 * (t - self.t_lo) / (self.t_hi - self.t_lo))
    }

    fn t_nodes(&self) -> Vec<(f64, f64)> {
        midpoint(self.t_lo, self.t_hi, self.t_nodes)
            .into_iter()
            .map(|(t, w)| (t, w * self.temporal(t)))
            .filter(|&(_, w)| w != 0.0)
            .collect()
    }
}

/// `T_loc(f1, f2)(x, y) = int f1(x + t, y) f2(x, y + t^2) zeta(x, y, t) dt`.
pub fn local_t(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    zeta: &CutoffSpec,
) -> Result<GridFunction2D> {
    zeta.validate()?;
    let (a1, a2) = spectra(f1, f2);
    let raw = parabolic_sum(&a1, &a2, &zeta.t_nodes(), f1.n);
    let n = f1.n as f64;
    let mut out = raw;
    for i in 0..out.n {
        for j in 0..out.n {
            let s = zeta.spatial(i as f64 / n, j as f64 / n);
            let v = out.at(i, j) * s;
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// `Lambda(f1, f2, f3) = int T_loc(f1, f2) f3 dx dy` with cell measure `1/n^2`.
pub fn local_form(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    f3: &GridFunction2D,
    zeta: &CutoffSpec,
) -> Result<Complex64> {
    if f3.n != f1.n {
        return Err(crate::error::LabError::SizeMismatch {
            expected: f1.n,
            got: f3.n,
        });
    }
    let t = local_t(f1, f2, zeta)?;
    let s: Complex64 = t.values.iter().zip(&f3.values).map(|(a, b)| a * b).sum();
    Ok(s / (f1.n * f1.n) as f64)
}
