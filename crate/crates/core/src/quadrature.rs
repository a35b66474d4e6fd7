//! Quadrature rules shared by the operator and form evaluators.

use crate::error::{param, Result};
use serde::{Deserialize, Serialize};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for k in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for l in 2..=m {
                let p2 = ((2 * l - 1) as f64 * z * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[k] = -z;
        x[m - 1 - k] = z;
        let wk = 2.0 / ((1.0 - z * z) * dp * dp);
        w[k] = wk;
        w[m - 1 - k] = wk;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]`: `panels` panels of `order` points.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((c + 0.5 * h * xi, 0.5 * h * wi));
        }
    }
    out
}

/// Composite midpoint rule on `[a, b]` with `m` cells.
pub fn midpoint(a: f64, b: f64, m: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / m as f64;
    (0..m).map(|k| (a + (k as f64 + 0.5) * h, h)).collect()
}

/// Minimum node count per dyadic shell and sign.
pub const MIN_NODES_PER_SHELL: usize = 16;

/// Dyadic-shell quadrature for the truncated singular kernels: scale `j`
/// lives on `|t| in [2^{-j-1}, 2^{1-j}]`, sampled by a uniform midpoint rule
/// with `nodes_per_shell` nodes for each sign of `t`. `t = 0` is never sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellQuadrature {
    pub nodes_per_shell: usize,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for ShellQuadrature {
    fn default() -> Self {
        Self {
            nodes_per_shell: 32,
            j_min: 3,
            j_max: 5,
        }
    }
}

impl ShellQuadrature {
    pub fn new(nodes_per_shell: usize, j_min: i32, j_max: i32) -> Result<Self> {
        let q = Self {
            nodes_per_shell,
            j_min,
            j_max,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_shell < MIN_NODES_PER_SHELL {
            return Err(param(
                "nodes_per_shell",
                format!(
                    "{} is below the minimum of {MIN_NODES_PER_SHELL}",
                    self.nodes_per_shell
                ),
            ));
        }
        if self.j_min > self.j_max {
            return Err(param(
                "j_range",
                format!("empty range [{}, {}]", self.j_min, self.j_max),
            ));
        }
        check_shell(self.j_min)
    }

    pub fn scales(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    /// Signed nodes and weights for scale `j` (both signs).
    pub fn shell(&self, j: i32) -> Vec<(f64, f64)> {
        let a = 2f64.powi(-j - 1);
        let b = 2f64.powi(1 - j);
        let pos = midpoint(a, b, self.nodes_per_shell);
        let mut out: Vec<(f64, f64)> = pos.iter().map(|&(t, w)| (-t, w)).rev().collect();
        out.extend(pos);
        out
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self {
            nodes_per_shell: self.nodes_per_shell * factor,
            ..*self
        }
    }
}

/// Scale `j` must keep its shell inside the torus: `2^{1-j} < 1/2`.
pub fn check_shell(j: i32) -> Result<()> {
    if 2f64.powi(1 - j) < 0.5 {
        Ok(())
    } else {
        Err(param(
            "j",
            format!("shell of scale {j} is wider than the torus"),
        ))
    }
}
