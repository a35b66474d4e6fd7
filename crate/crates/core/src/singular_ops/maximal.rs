use super::{parabolic_sum, spectra};
use crate::error::{param, Result};
use crate::quadrature::{check_shell, ShellQuadrature};
use crate::torus::{Axis, GridFunction1D, GridFunction2D};
use crate::windows::annulus_psi;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `M_j(f1, f2) = int f1(x + t, y) f2(x, y + t^2) psi(2^j t) 2^j dt`.
pub fn maximal_scale(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    j: i32,
    quad: &ShellQuadrature,
) -> Result<GridFunction2D> {
    check_shell(j)?;
    let s = 2f64.powi(j);
    let nodes: Vec<(f64, f64)> = quad
        .shell(j)
        .into_iter()
        .map(|(t, w)| (t, w * annulus_psi(s * t) * s))
        .collect();
    let (a1, a2) = spectra(f1, f2);
    Ok(parabolic_sum(&a1, &a2, &nodes, f1.n))
}

/// `sup_j |M_j(|f1|, |f2|)|` over the scales of `quad`.
pub fn maximal(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    quad: &ShellQuadrature,
) -> Result<GridFunction2D> {
    quad.validate()?;
    let (g1, g2) = (f1.abs(), f2.abs());
    let mut out = vec![0.0f64; f1.n * f1.n];
    for j in quad.scales() {
        let m = maximal_scale(&g1, &g2, j, quad)?;
        for (o, z) in out.iter_mut().zip(&m.values) {
            *o = o.max(z.norm());
        }
    }
    GridFunction2D::new(
        f1.n,
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// Running integral of `|g|` read as a step function (cell `[i/n, (i+1)/n)`
/// carries `|g_i|`), extended periodically.
struct Primitive {
    n: usize,
    abs: Vec<f64>,
    prefix: Vec<f64>,
}

impl Primitive {
    fn new(g: &[Complex64]) -> Self {
        let n = g.len();
        let abs: Vec<f64> = g.iter().map(|z| z.norm()).collect();
        let mut prefix = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for a in &abs {
            acc += a / n as f64;
            prefix.push(acc);
        }
        Self { n, abs, prefix }
    }

    fn at(&self, u: f64) -> f64 {
        let v = u * self.n as f64;
        let m = v.floor();
        let q = v - m;
        let m = m as i64;
        let wraps = m.div_euclid(self.n as i64) as f64;
        let k = m.rem_euclid(self.n as i64) as usize;
        wraps * self.prefix[self.n] + self.prefix[k] + q * self.abs[k] / self.n as f64
    }
}

fn shifted_max_line(g: &[Complex64], sigma: f64, s_range: (i32, i32)) -> Vec<f64> {
    let n = g.len();
    let p = Primitive::new(g);
    let mut out = vec![0.0f64; n];
    for s in s_range.0..=s_range.1 {
        let len = 2f64.powi(s);
        let (a, b) = (sigma * len, (sigma + 1.0) * len);
        for (i, o) in out.iter_mut().enumerate() {
            let x = i as f64 / n as f64;
            let avg = (p.at(x + b) - p.at(x + a)) / len;
            *o = o.max(avg);
        }
    }
    out
}

/// `sup_s 2^{-s} int_{[sigma 2^s, (sigma + 1) 2^s]} |g(x + t)| dt` over
/// `s_range.0 ..= s_range.1`, with `g` read as a step function on its cells.
pub fn shifted_maximal(
    g: &GridFunction1D,
    sigma: f64,
    s_range: (i32, i32),
) -> Result<GridFunction1D> {
    if s_range.0 > s_range.1 {
        return Err(param("s_range", "empty range"));
    }
    let v = shifted_max_line(&g.values, sigma, s_range);
    GridFunction1D::new(g.n, v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// Default dyadic scale range: from one cell to the whole period.
pub fn default_s_range(n: usize) -> (i32, i32) {
    (-(n.trailing_zeros() as i32), 0)
}

/// The shifted maximal function applied along one axis of a 2D function.
pub fn shifted_maximal_2d(
    f: &GridFunction2D,
    axis: Axis,
    sigma: f64,
    s_range: (i32, i32),
) -> Result<GridFunction2D> {
    if s_range.0 > s_range.1 {
        return Err(param("s_range", "empty range"));
    }
    let n = f.n;
    let mut out = GridFunction2D::zeros(n)?;
    for line in 0..n {
        let fiber = match axis {
            Axis::X => f.fiber_x(line),
            Axis::Y => f.fiber_y(line),
        };
        let m = shifted_max_line(&fiber.values, sigma, s_range);
        for (k, v) in m.into_iter().enumerate() {
            let (i, j) = match axis {
                Axis::X => (k, line),
                Axis::Y => (line, k),
            };
            out.set(i, j, Complex64::new(v, 0.0));
        }
    }
    Ok(out)
}

/// Parameters of the pointwise domination bound by products of shifted
/// maximal functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationSpec {
    pub kappa: u32,
    /// Decay exponent `N` of the weights `(1 + |m|)^{-N}`.
    pub decay: i32,
    /// Translation window `|m| <= n_window`.
    pub n_window: i64,
}

/// Shift parameter `sigma_{l,m} = 2^{-3} m + l^2 2^{-kappa + 3}` (same for
/// both signs of `l`).
pub fn domination_sigma(l: i64, m: i64, kappa: u32) -> f64 {
    m as f64 / 8.0 + (l * l) as f64 * 2f64.powi(3 - kappa as i32)
}

fn l_window(kappa: u32) -> i64 {
    1i64 << (kappa + 1)
}

/// `sum_{|m| <= W} (1 + |m|)^{-N} 2^{-kappa} sum_{|l| <= 2^{kappa+1}}
/// M^{(1)}_l f1 * M^{(2)}_{sigma_{l,m}} f2`.
pub fn domination_rhs(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    spec: &DominationSpec,
) -> Result<GridFunction2D> {
    let all: Vec<usize> = (0..f1.n).collect();
    let v = domination_rhs_on(f1, f2, spec, &all, &all)?;
    GridFunction2D::new(
        f1.n,
        v.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// `domination_rhs` on the lattice `xs x ys` only, as a row-major vector with
/// entry `a * ys.len() + b` at `(xs[a], ys[b])`.
pub fn domination_rhs_on(
    f1: &GridFunction2D,
    f2: &GridFunction2D,
    spec: &DominationSpec,
    xs: &[usize],
    ys: &[usize],
) -> Result<Vec<f64>> {
    if spec.kappa < 1 {
        return Err(param("kappa", "must be at least 1"));
    }
    if spec.n_window < 0 {
        return Err(param("n_window", "must be nonnegative"));
    }
    let n = f1.n;
    if f2.n != n || xs.iter().chain(ys).any(|&i| i >= n) {
        return Err(param("points", "outside the grid"));
    }
    let sr = default_s_range(n);
    let lw = l_window(spec.kappa);
    let scale = 2f64.powi(-(spec.kappa as i32));
    let rows: Vec<Vec<Complex64>> = ys.iter().map(|&j| f1.fiber_x(j).values).collect();
    let cols: Vec<Vec<Complex64>> = xs.iter().map(|&i| f2.fiber_y(i).values).collect();
    let mut out = vec![0.0f64; xs.len() * ys.len()];
    // sigma_{l,m} depends on l only through l^2.
    for l in 0..=lw {
        let mut m1 = vec![0.0f64; xs.len() * ys.len()];
        for sign in if l == 0 { vec![1.0] } else { vec![1.0, -1.0] } {
            for (b, row) in rows.iter().enumerate() {
                let line = shifted_max_line(row, sign * l as f64, sr);
                for (a, &i) in xs.iter().enumerate() {
                    m1[a * ys.len() + b] += line[i];
                }
            }
        }
        for m in -spec.n_window..=spec.n_window {
            let w = (1.0 + m.abs() as f64).powi(-spec.decay) * scale;
            let sigma = domination_sigma(l, m, spec.kappa);
            for (a, col) in cols.iter().enumerate() {
                let line = shifted_max_line(col, sigma, sr);
                for (b, &j) in ys.iter().enumerate() {
                    out[a * ys.len() + b] += w * m1[a * ys.len() + b] * line[j];
                }
            }
        }
    }
    Ok(out)
}

/// `sum a log(2 + |sigma_1|)^pa log(2 + |sigma_2|)^pb` over the coefficients
/// of `domination_rhs`.
pub fn domination_coefficient_sum(spec: &DominationSpec, pa: i32, pb: i32) -> f64 {
    let lw = l_window(spec.kappa);
    let scale = 2f64.powi(-(spec.kappa as i32));
    let mut s = 0.0;
    for m in -spec.n_window..=spec.n_window {
        let a = (1.0 + m.abs() as f64).powi(-spec.decay) * scale;
        for l in -lw..=lw {
            let s1 = (2.0 + l.abs() as f64).ln().powi(pa);
            let s2 = (2.0 + domination_sigma(l, m, spec.kappa).abs())
                .ln()
                .powi(pb);
            s += a * s1 * s2;
        }
    }
    s
}
