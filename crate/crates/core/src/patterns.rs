//! Corner patterns `(x, y), (x + t, y), (x, y + t^2)` in sets of the torus:
//! dyadic martingale averages, the trilinear count, the lower bound for
//! `f E_k^(1) f E_l^(2) f`, a pattern finder and the energy-increment
//! dichotomy.
//!
//! Shifts by `t` and `t^2` move to the nearest cell with periodic wrap, so
//! `t = m / n` moves `x` by `m` cells and `y` by `round(m^2 / n)` cells.

use crate::error::{param, LabError, Result};
use crate::quadrature::composite_gl;
use crate::rng::LabRng;
use crate::torus::{check_size, freq, Axis, AxisSpectrum, GridFunction2D};
use crate::windows::mollifier_theta;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Cell shift of the nearest cell to `s` cells, modulo `n`.
fn cell_shift(s: f64, n: usize) -> usize {
    ((s + 0.5).floor() as i64).rem_euclid(n as i64) as usize
}

/// Replace each fiber along `axis` by its means over dyadic blocks of
/// `n / 2^k` cells.
pub fn martingale_avg(f: &GridFunction2D, axis: Axis, k: u32) -> Result<GridFunction2D> {
    let n = f.n;
    if k >= usize::BITS || (1usize << k) > n {
        return Err(param("k", format!("2^{k} exceeds the grid size {n}")));
    }
    let w = n >> k;
    let mut out = f.clone();
    for line in 0..n {
        for b in 0..(1usize << k) {
            let cells = (b * w..(b + 1) * w).map(|c| {
                if axis == Axis::X {
                    (c, line)
                } else {
                    (line, c)
                }
            });
            let mean: Complex64 =
                cells.clone().map(|(i, j)| f.at(i, j)).sum::<Complex64>() / w as f64;
            for (i, j) in cells {
                out.set(i, j, mean);
            }
        }
    }
    Ok(out)
}

/// `(t, n^{-2} sum_{x,y} f(x,y) f(x+t,y) f(x,y+t^2))` at `t = m / t_nodes`,
/// `m = 0 .. t_nodes - 1`.
pub fn count_profile(f: &GridFunction2D, t_nodes: usize) -> Result<Vec<(f64, Complex64)>> {
    let n = f.n;
    if t_nodes < n {
        return Err(param("t_nodes", format!("need at least n = {n} nodes")));
    }
    let mut out = Vec::with_capacity(t_nodes);
    for m in 0..t_nodes {
        let t = m as f64 / t_nodes as f64;
        let (a, b) = (cell_shift(t * n as f64, n), cell_shift(t * t * n as f64, n));
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += f.at(i, j) * f.at((i + a) % n, j) * f.at(i, (j + b) % n);
            }
        }
        out.push((t, s / (n * n) as f64));
    }
    Ok(out)
}

/// `int_0^1 int f(x,y) f(x+t,y) f(x,y+t^2) dx dy dt` with the cell sum at
/// `t_nodes` uniform nodes.
pub fn count_integral(f: &GridFunction2D, t_nodes: usize) -> Result<f64> {
    let p = count_profile(f, t_nodes)?;
    Ok(p.iter().map(|(_, v)| v.re).sum::<f64>() / t_nodes as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Slack allowed in `lhs >= rhs`.
pub const LOWER_BOUND_SLACK: f64 = 1e-12;

fn unit_interval_values(f: &GridFunction2D) -> Result<()> {
    if f.values
        .iter()
        .any(|z| z.im != 0.0 || !(0.0..=1.0).contains(&z.re))
    {
        return Err(param("f", "values must be real and lie in [0, 1]"));
    }
    Ok(())
}

/// `lhs = mean(f E_k^(1) f E_l^(2) f)` against `rhs = mean(f)^4`.
pub fn lower_bound_check(f: &GridFunction2D, k: u32, l: u32) -> Result<LowerBound> {
    unit_interval_values(f)?;
    let e1 = martingale_avg(f, Axis::X, k)?;
    let e2 = martingale_avg(f, Axis::Y, l)?;
    let nn = (f.n * f.n) as f64;
    let lhs = (0..f.values.len())
        .map(|c| f.values[c].re * e1.values[c].re * e2.values[c].re)
        .sum::<f64>()
        / nn;
    let rhs = (f.values.iter().map(|z| z.re).sum::<f64>() / nn).powi(4);
    Ok(LowerBound {
        lhs,
        rhs,
        ok: lhs >= rhs - LOWER_BOUND_SLACK,
    })
}

/// A subset of the `n x n` cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitmapSet {
    pub n: usize,
    /// Row-major like grid values: cell `(i, j)` at `i * n + j`.
    pub cells: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BitmapJson {
    n: usize,
    rows: Vec<String>,
}

impl BitmapSet {
    pub fn new(n: usize, cells: Vec<bool>) -> Result<Self> {
        check_size(n)?;
        if cells.len() != n * n {
            return Err(LabError::SizeMismatch {
                expected: n * n,
                got: cells.len(),
            });
        }
        Ok(Self { n, cells })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(n, vec![true; n * n])
    }

    pub fn random(n: usize, density: f64, rng: &mut LabRng) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(param("density", "must lie in [0, 1]"));
        }
        Self::new(n, (0..n * n).map(|_| rng.gen_bool(density)).collect())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[(i % self.n) * self.n + j % self.n]
    }

    pub fn density(&self) -> f64 {
        self.cells.iter().filter(|&&c| c).count() as f64 / self.cells.len() as f64
    }

    pub fn indicator(&self) -> GridFunction2D {
        let values = self
            .cells
            .iter()
            .map(|&c| Complex64::new(if c { 1.0 } else { 0.0 }, 0.0))
            .collect();
        GridFunction2D { n: self.n, values }
    }

    fn rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.n)
            .map(|r| r.iter().map(|&c| if c { '1' } else { '0' }).collect())
            .collect()
    }

    /// Plain PBM: `P1`, then `n n`, then one row of cells per line, where
    /// row `i` holds the cells `(i, 0 .. n)`.
    pub fn write_pbm<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "P1\n{} {}", self.n, self.n)?;
        for r in self.rows() {
            let spaced: Vec<String> = r.chars().map(String::from).collect();
            writeln!(w, "{}", spaced.join(" "))?;
        }
        Ok(())
    }

    /// Reads plain PBM (`P1`, width, height) or the bare form (`n`, then
    /// `n` rows of 0/1). `#` starts a comment; whitespace between cells is
    /// optional.
    pub fn read_pbm<R: BufRead>(r: R) -> Result<Self> {
        let mut text = String::new();
        for line in r.lines() {
            let line = line?;
            text.push_str(line.split('#').next().unwrap_or(""));
            text.push('\n');
        }
        let bad = |m: &str| LabError::Parse(format!("bitmap: {m}"));
        let mut tokens = text.split_whitespace().peekable();
        let first = tokens.next().ok_or_else(|| bad("empty input"))?;
        let n: usize = if first == "P1" {
            let w: usize = tokens
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("missing width"))?;
            let h: usize = tokens
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("missing height"))?;
            if w != h {
                return Err(bad("bitmap must be square"));
            }
            w
        } else {
            first
                .parse()
                .map_err(|_| bad("expected P1 or the grid size"))?
        };
        let mut cells = Vec::with_capacity(n * n);
        for tok in tokens {
            for c in tok.chars() {
                match c {
                    '0' => cells.push(false),
                    '1' => cells.push(true),
                    _ => return Err(bad(&format!("unexpected character {c:?}"))),
                }
            }
        }
        Self::new(n, cells)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&BitmapJson {
            n: self.n,
            rows: self.rows(),
        })?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: BitmapJson = serde_json::from_str(s)?;
        if j.rows.len() != j.n || j.rows.iter().any(|r| r.len() != j.n) {
            return Err(LabError::Parse(
                "bitmap rows must form an n x n block".into(),
            ));
        }
        let mut cells = Vec::with_capacity(j.n * j.n);
        for r in &j.rows {
            for c in r.chars() {
                match c {
                    '0' => cells.push(false),
                    '1' => cells.push(true),
                    _ => {
                        return Err(LabError::Parse(format!(
                            "bitmap: unexpected character {c:?}"
                        )))
                    }
                }
            }
        }
        Self::new(j.n, cells)
    }
}

/// Cells `(i, j)`, `(i + m, j)`, `(i, j + round(m^2 / n))` with `t = m / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub m: usize,
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Triple {
    fn at(n: usize, i: usize, j: usize, m: usize) -> Self {
        let h = 1.0 / n as f64;
        Self {
            i,
            j,
            m,
            x: i as f64 * h,
            y: j as f64 * h,
            t: m as f64 * h,
        }
    }

    pub fn cells(&self, n: usize) -> [(usize, usize); 3] {
        let b = cell_shift((self.m * self.m) as f64 / n as f64, n);
        [
            (self.i, self.j),
            ((self.i + self.m) % n, self.j),
            (self.i, (self.j + b) % n),
        ]
    }

    pub fn verify(&self, e: &BitmapSet) -> bool {
        self.m >= 1 && self.m < e.n && self.cells(e.n).iter().all(|&(i, j)| e.get(i, j))
    }
}

/// The pattern with the largest `t = m / n >= t_min`, `1 <= m < n`, scanning
/// `(i, j)` in order for each `t`.
pub fn pattern_search(e: &BitmapSet, t_min: f64) -> Result<Option<Triple>> {
    let n = e.n;
    if !(t_min >= 1.0 / n as f64) {
        return Err(param(
            "t_min",
            format!("must be at least 1/n = {}", 1.0 / n as f64),
        ));
    }
    let m_min = (t_min * n as f64 - 1e-9).ceil().max(1.0) as usize;
    for m in (m_min..n).rev() {
        for i in 0..n {
            for j in 0..n {
                let tr = Triple::at(n, i, j, m);
                if tr.verify(e) {
                    return Ok(Some(tr));
                }
            }
        }
    }
    Ok(None)
}

/// Fourier transform of the unit-mass mollifier, `int theta(x) cos(2 pi x xi) dx`.
pub fn mollifier_hat(xi: f64) -> f64 {
    thread_local! {
        static NODES: Vec<(f64, f64)> = composite_gl(0.0, 2.0, 64, 8);
    }
    NODES.with(|nodes| {
        2.0 * nodes
            .iter()
            .map(|&(x, w)| w * mollifier_theta(x) * (2.0 * std::f64::consts::PI * x * xi).cos())
            .sum::<f64>()
    })
}

/// `f *_axis theta_k` with `theta_k(x) = 2^k theta(2^k x)` periodized.
pub fn mollify(a: &AxisSpectrum, k: u32) -> GridFunction2D {
    let s = 2f64.powi(-(k as i32));
    a.filtered(|xi| mollifier_hat(s * xi as f64).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    CountLarge,
    IncrementLarge,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DichotomyRecord {
    pub l: usize,
    pub k_l: u32,
    pub k_next: u32,
    pub count: f64,
    pub increment: f64,
    pub count_threshold: f64,
    pub increment_threshold: f64,
    pub branch: Branch,
}

/// `count > 2^{-k_{l+1} - 10} c eps^4` selects `CountLarge`; otherwise
/// `increment > 2^{-10} c eps^4` selects `IncrementLarge`. `eps` defaults to
/// the mean of `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyThresholds {
    pub c: f64,
    pub eps: Option<f64>,
}

impl Default for DichotomyThresholds {
    fn default() -> Self {
        Self { c: 1.0, eps: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyRun {
    pub records: Vec<DichotomyRecord>,
    /// Set when `2^{k_{l+1}}` passed `n` before `max_iter` levels ran.
    pub truncated: bool,
    /// `sup_xi sum_l |theta^(2^{-k_{l+1}} xi) - theta^(2^{-k_l} xi)|^2` over grid frequencies.
    pub energy_constant: f64,
    /// `sum_l increment_l^2`, at most `4 energy_constant ||f||_2^2`.
    pub energy_sum: f64,
    pub norm_sq: f64,
}

fn scales(k0: u32, m_factor: u32, max_iter: usize, n: usize) -> (Vec<u32>, bool) {
    let mut ks = vec![k0];
    while ks.len() <= max_iter {
        let next = ks.last().unwrap().saturating_mul(m_factor);
        if next >= usize::BITS || (1usize << next) > n {
            return (ks, true);
        }
        ks.push(next);
    }
    (ks, false)
}

/// Multiplier energy constant for the scale sequence.
pub fn dichotomy_energy_constant(ks: &[u32], n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let xi = freq(k, n) as f64;
            ks.windows(2)
                .map(|w| {
                    (mollifier_hat(xi * 2f64.powi(-(w[1] as i32)))
                        - mollifier_hat(xi * 2f64.powi(-(w[0] as i32))))
                    .powi(2)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Run the scale sequence `k_{l+1} = M k_l` from `k0` for up to `max_iter`
/// levels, classifying each level by the two thresholds. The count is the
/// unweighted `count_integral` with `2n` nodes, the same at every level.
pub fn dichotomy_run(
    f: &GridFunction2D,
    k0: u32,
    m_factor: u32,
    max_iter: usize,
    th: &DichotomyThresholds,
) -> Result<DichotomyRun> {
    let n = f.n;
    if k0 < 1 || m_factor < 2 {
        return Err(param("k0/m_factor", "need k0 >= 1 and M >= 2"));
    }
    if (1usize << k0.min(63)) > n || k0 >= usize::BITS {
        return Err(param("k0", format!("2^k0 exceeds the grid size {n}")));
    }
    if !(th.c > 0.0) {
        return Err(param("c", "must be positive"));
    }
    let nn = (n * n) as f64;
    let eps = match th.eps {
        Some(e) if e > 0.0 => e,
        Some(_) => return Err(param("eps", "must be positive")),
        None => f.values.iter().map(|z| z.re).sum::<f64>() / nn,
    };
    let (ks, truncated) = scales(k0, m_factor, max_iter, n);
    let count = count_integral(f, 2 * n)?;
    let a1 = AxisSpectrum::new(f, Axis::X);
    let a2 = AxisSpectrum::new(f, Axis::Y);
    let smooth: Vec<(GridFunction2D, GridFunction2D)> = ks
        .iter()
        .map(|&k| (mollify(&a1, k), mollify(&a2, k)))
        .collect();
    let base = th.c * eps.powi(4);
    let mut records = Vec::new();
    for l in 0..ks.len() - 1 {
        let d1 = smooth[l + 1].0.sub(&smooth[l].0).norm_lp(2.0);
        let d2 = smooth[l + 1].1.sub(&smooth[l].1).norm_lp(2.0);
        let increment = d1 + d2;
        let count_threshold = 2f64.powi(-(ks[l + 1] as i32) - 10) * base;
        let increment_threshold = 2f64.powi(-10) * base;
        let branch = if count > count_threshold {
            Branch::CountLarge
        } else if increment > increment_threshold {
            Branch::IncrementLarge
        } else {
            Branch::Neither
        };
        records.push(DichotomyRecord {
            l,
            k_l: ks[l],
            k_next: ks[l + 1],
            count,
            increment,
            count_threshold,
            increment_threshold,
            branch,
        });
    }
    let energy_sum = records.iter().map(|r| r.increment.powi(2)).sum();
    Ok(DichotomyRun {
        records,
        truncated,
        energy_constant: dichotomy_energy_constant(&ks, n),
        energy_sum,
        norm_sq: f.norm_lp(2.0).powi(2),
    })
}

/// CSV with columns `l, k_l, count, increment, branch`.
pub fn write_dichotomy_csv<W: Write>(run: &DichotomyRun, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["l", "k_l", "count", "increment", "branch"])?;
    for r in &run.records {
        let b = match r.branch {
            Branch::CountLarge => "count_large",
            Branch::IncrementLarge => "increment_large",
            Branch::Neither => "neither",
        };
        out.write_record([
            r.l.to_string(),
            r.k_l.to_string(),
            r.count.to_string(),
            r.increment.to_string(),
            b.into(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
