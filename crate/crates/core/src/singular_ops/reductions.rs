use super::kernels::hilbert_nodes;
use crate::error::{param, Result};
use crate::quadrature::{check_shell, ShellQuadrature};
use crate::torus::{GridFunction1D, GridFunction2D};
use num_complex::Complex64;

fn check_quad(quad: &ShellQuadrature) -> Result<()> {
    quad.validate()?;
    quad.scales().try_for_each(check_shell)
}

fn line_check(a: &GridFunction1D, b: &GridFunction1D) -> Result<()> {
    if a.n != b.n {
        return Err(crate::error::LabError::SizeMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    Ok(())
}

/// `sum_j int g1(x + t) g2(x + t^2) psi(2^j t) dt / t` over the scales of `quad`.
pub fn bht_curvature(
    g1: &GridFunction1D,
    g2: &GridFunction1D,
    quad: &ShellQuadrature,
) -> Result<GridFunction1D> {
    check_quad(quad)?;
    line_check(g1, g2)?;
    let (s1, s2) = (g1.forward(), g2.forward());
    let n = g1.n;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in quad.scales() {
        for (t, w) in hilbert_nodes(j, quad) {
            let mut a = s1.clone();
            a.modulate(t);
            let mut b = s2.clone();
            b.modulate(t * t);
            let (a, b) = (a.inverse(), b.inverse());
            for ((o, u), v) in out.iter_mut().zip(&a.values).zip(&b.values) {
                *o += w * u * v;
            }
        }
    }
    GridFunction1D::new(n, out)
}

/// `sup_{N in n_set} |sum_j int g(x - t) e^{i N t^2} psi(2^j t) dt / t|`.
pub fn sw_maximal(
    g: &GridFunction1D,
    n_set: &[f64],
    quad: &ShellQuadrature,
) -> Result<GridFunction1D> {
    check_quad(quad)?;
    if n_set.is_empty() || n_set.iter().any(|v| !v.is_finite()) {
        return Err(param("n_set", "must be a nonempty list of finite reals"));
    }
    let s = g.forward();
    let n = g.n;
    let nodes: Vec<(f64, f64)> = quad.scales().flat_map(|j| hilbert_nodes(j, quad)).collect();
    let shifted: Vec<Vec<Complex64>> = nodes
        .iter()
        .map(|&(t, _)| {
            let mut a = s.clone();
            a.modulate(-t);
            a.inverse().values
        })
        .collect();
    let mut best = vec![0.0f64; n];
    for &big_n in n_set {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (&(t, w), line) in nodes.iter().zip(&shifted) {
            let c = w * Complex64::from_polar(1.0, big_n * t * t);
            for (o, v) in acc.iter_mut().zip(line) {
                *o += c * v;
            }
        }
        for (b, a) in best.iter_mut().zip(&acc) {
            *b = b.max(a.norm());
        }
    }
    GridFunction1D::new(
        n,
        best.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// `f(x, y) = g(x + y)`. Then `f1(x + t, y) f2(x, y + t^2) = g1(x + y + t) g2(x + y + t^2)`,
/// so the 2D parabolic transform of the embedded pair is the curved 1D
/// transform read along diagonals.
pub fn embed_diagonal(g: &GridFunction1D) -> GridFunction2D {
    let n = g.n;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            values.push(g.values[(i + j) % n]);
        }
    }
    GridFunction2D { n, values }
}
