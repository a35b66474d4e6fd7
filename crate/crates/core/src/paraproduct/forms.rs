//! Four-function forms over the slabs `Q x [ell(Q)/2, ell(Q)]`.
//!
//! Every form is `int c(t) int_{R^4} f1(x',y) f2(x,y') f3(x,y) f4(x',y')
//! K1(x) K2(x') K3(y) K4(y')` with kernels depending on `(p, t)` in `x` and
//! `(q, t)` in `y`. On the torus the `R^4` integral is a grid sum with
//! periodized kernels. For fixed `t` the `p` and `q` integrals are folded
//! into two `n x n` matrices first, then contracted in `O(n^4)`.

use super::dyadic::{tree_leaves, DyadicGeometry, DyadicRectangle, Tree};
use super::kernels::{fourier_per, gauss_h_per, gauss_per};
use crate::error::{param, Result};
use crate::quadrature::composite_gl;
use crate::torus::GridFunction2D;
use crate::windows::{annulus_psi, cone_profile, ConeProfile};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    LambdaUv,
    Theta1,
    Theta2,
    Xi,
    Bark,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormParams {
    pub u: f64,
    pub v: f64,
    pub lambda: f64,
    pub r: f64,
}

impl Default for FormParams {
    fn default() -> Self {
        Self {
            u: 0.0,
            v: 0.0,
            lambda: 2.0,
            r: 1.0,
        }
    }
}

impl FormParams {
    /// `C_{u,v} = (1 + |u| + |v|)^{100}`.
    pub fn c_bound(&self) -> f64 {
        (1.0 + self.u.abs() + self.v.abs()).powi(100)
    }

    fn validate(&self, kind: FormKind) -> Result<()> {
        if ![self.u, self.v, self.lambda, self.r]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(param("params", "must be finite"));
        }
        if kind != FormKind::LambdaUv && self.lambda < 1.0 {
            return Err(param("lambda", "must be at least 1"));
        }
        Ok(())
    }
}

/// Composite Gauss-Legendre rules of a fixed low order for the `t` slab and
/// the `p`, `q` intervals, so that refinement shows a clean convergence order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormQuadrature {
    pub t_panels: usize,
    pub pq_panels: usize,
    pub order: usize,
}

impl Default for FormQuadrature {
    fn default() -> Self {
        Self {
            t_panels: 16,
            pq_panels: 16,
            order: 2,
        }
    }
}

impl FormQuadrature {
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t_panels: self.t_panels * factor,
            pq_panels: self.pq_panels * factor,
            order: self.order,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_panels == 0 || self.pq_panels == 0 || self.order == 0 {
            return Err(param("quad", "panel counts and order must be positive"));
        }
        Ok(())
    }

    fn t_nodes(&self, ell: f64) -> Vec<(f64, f64)> {
        composite_gl(0.5 * ell, ell, self.t_panels, self.order)
    }

    fn pq_nodes(&self, (a, b): (f64, f64)) -> Vec<(f64, f64)> {
        composite_gl(a, b, self.pq_panels, self.order)
    }
}

/// `n x n` kernel matrix indexed `(x, x')` or `(y, y')`.
type Mat = Vec<Complex64>;

fn accumulate_outer(m: &mut Mat, w: f64, a: &[f64], b: &[f64]) {
    let n = a.len();
    for (i, ai) in a.iter().enumerate() {
        let c = w * ai;
        for (o, bj) in m[i * n..(i + 1) * n].iter_mut().zip(b) {
            o.re += c * bj;
        }
    }
}

fn accumulate_outer_c(m: &mut Mat, w: f64, a: &[Complex64], b: &[Complex64]) {
    let n = a.len();
    for (i, ai) in a.iter().enumerate() {
        let c = w * ai;
        for (o, bj) in m[i * n..(i + 1) * n].iter_mut().zip(b) {
            *o += c * bj;
        }
    }
}

/// `n^{-4} sum f1(x',y) f2(x,y') f3(x,y) f4(x',y') P(x,x') Q(y,y')`.
pub(crate) fn contract(fs: &[&GridFunction2D; 4], p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let n = fs[0].n;
    let (f1, f2, f3, f4) = (&fs[0].values, &fs[1].values, &fs[2].values, &fs[3].values);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    for x in 0..n {
        for xp in 0..n {
            let pxx = p[x * n + xp];
            if pxx == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yp, o) in v.iter_mut().enumerate() {
                *o = f2[x * n + yp] * f4[xp * n + yp];
            }
            let mut s = Complex64::new(0.0, 0.0);
            for y in 0..n {
                let row = &q[y * n..(y + 1) * n];
                let qv: Complex64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                s += f3[x * n + y] * f1[xp * n + y] * qv;
            }
            total += pxx * s;
        }
    }
    total / (n as f64).powi(4)
}

/// Per-rectangle values of the telescoping terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RectTerms {
    pub theta1: Complex64,
    pub theta2: Complex64,
    pub xi: Complex64,
    pub bark: Complex64,
}

struct Slab {
    s: f64,
    sigma: f64,
    shift: f64,
}

impl Slab {
    fn new(geo: &DyadicGeometry, prm: &FormParams, t: f64) -> Self {
        let sigma = t.powi(geo.beta as i32);
        Self {
            s: prm.lambda * t.powi(geo.alpha as i32),
            sigma,
            shift: prm.r * sigma,
        }
    }
}

struct Evaluator<'a> {
    n: usize,
    geo: DyadicGeometry,
    fs: [&'a GridFunction2D; 4],
    prm: FormParams,
    quad: FormQuadrature,
}

impl<'a> Evaluator<'a> {
    fn zero(&self) -> Mat {
        vec![Complex64::new(0.0, 0.0); self.n * self.n]
    }

    /// `int_I g g dp` and `int_I h h dp` in `x` at scale `s`.
    fn x_mats(&self, q: &DyadicRectangle, s: f64) -> (Mat, Mat) {
        let (mut gg, mut hh) = (self.zero(), self.zero());
        for (p, w) in self.quad.pq_nodes(self.geo.x_interval(q)) {
            let g = gauss_per(self.n, s, p);
            let h = gauss_h_per(self.n, s, p);
            accumulate_outer(&mut gg, w, &g, &g);
            accumulate_outer(&mut hh, w, &h, &h);
        }
        (gg, hh)
    }

    fn y_mats(&self, q: &DyadicRectangle, sl: &Slab) -> (Mat, Mat) {
        let (mut gg, mut hh) = (self.zero(), self.zero());
        for (c, w) in self.quad.pq_nodes(self.geo.y_interval(q)) {
            let g = gauss_per(self.n, sl.sigma, c + sl.shift);
            let h = gauss_h_per(self.n, sl.sigma, c + sl.shift);
            accumulate_outer(&mut gg, w, &g, &g);
            accumulate_outer(&mut hh, w, &h, &h);
        }
        (gg, hh)
    }

    /// `(s / 2 pi)(h (x) g + g (x) h)` at center `c`, minus `shift * g (x) g`.
    fn boundary(&self, s: f64, c: f64, shift: f64) -> Mat {
        let g = gauss_per(self.n, s, c);
        let h = gauss_h_per(self.n, s, c);
        let mut m = self.zero();
        accumulate_outer(&mut m, s / (2.0 * PI), &h, &g);
        accumulate_outer(&mut m, s / (2.0 * PI), &g, &h);
        if shift != 0.0 {
            accumulate_outer(&mut m, -shift, &g, &g);
        }
        m
    }

    fn diff(a: Mat, b: Mat) -> Mat {
        a.into_iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn xi(&self, q: &DyadicRectangle) -> Complex64 {
        let sl = Slab::new(&self.geo, &self.prm, self.geo.ell(q));
        let (px, _) = self.x_mats(q, sl.s);
        let (qy, _) = self.y_mats(q, &sl);
        PI * contract(&self.fs, &px, &qy)
    }

    fn terms(&self, q: &DyadicRectangle, want_theta: bool, want_bark: bool) -> RectTerms {
        let mut out = RectTerms::default();
        let (a, b) = (self.geo.alpha as f64, self.geo.beta as f64);
        let (i_lo, i_hi) = self.geo.x_interval(q);
        let (j_lo, j_hi) = self.geo.y_interval(q);
        let mut bark = Complex64::new(0.0, 0.0);
        for (t, w) in self.quad.t_nodes(self.geo.ell(q)) {
            let wt = w / t;
            let sl = Slab::new(&self.geo, &self.prm, t);
            let (px, ph) = self.x_mats(q, sl.s);
            let (qy, qh) = self.y_mats(q, &sl);
            if want_theta {
                out.theta1 += wt * contract(&self.fs, &ph, &qy);
                out.theta2 += wt * contract(&self.fs, &px, &qh);
            }
            if want_bark {
                let dfx = Self::diff(
                    self.boundary(sl.s, i_hi, 0.0),
                    self.boundary(sl.s, i_lo, 0.0),
                );
                let dfy = Self::diff(
                    self.boundary(sl.sigma, j_hi + sl.shift, sl.shift),
                    self.boundary(sl.sigma, j_lo + sl.shift, sl.shift),
                );
                bark +=
                    wt * (a * contract(&self.fs, &dfx, &qy) + b * contract(&self.fs, &px, &dfy));
            }
        }
        out.bark = -PI * bark;
        out
    }

    fn lambda_uv(
        &self,
        q: &DyadicRectangle,
        cone: &ConeProfile,
        c: &dyn Fn(f64) -> Complex64,
    ) -> Complex64 {
        let (u, v) = (self.prm.u, self.prm.v);
        let phi_hat = |xi: f64| cone.eval(xi) * Complex64::from_polar(1.0, -2.0 * PI * u * xi);
        // (h * psi-check shifted by v)^ = 2 pi i xi g(xi) psi(xi) e(-v xi).
        let hpsi_hat = |xi: f64| {
            Complex64::new(0.0, 2.0 * PI * xi * (-PI * xi * xi).exp() * annulus_psi(xi))
                * Complex64::from_polar(1.0, -2.0 * PI * v * xi)
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (t, w) in self.quad.t_nodes(self.geo.ell(q)) {
            let (sx, sy) = (t.powi(self.geo.alpha as i32), t.powi(self.geo.beta as i32));
            let mut pm = self.zero();
            for (p, wp) in self.quad.pq_nodes(self.geo.x_interval(q)) {
                let k1 = fourier_per(self.n, sx, p, 2.0, phi_hat);
                let k2: Vec<Complex64> = gauss_per(self.n, sx, p)
                    .into_iter()
                    .map(|v| v.into())
                    .collect();
                accumulate_outer_c(&mut pm, wp, &k1, &k2);
            }
            let mut qm = self.zero();
            for (qc, wq) in self.quad.pq_nodes(self.geo.y_interval(q)) {
                let k3 = fourier_per(self.n, sy, qc, 2.0, hpsi_hat);
                let k4: Vec<Complex64> = gauss_h_per(self.n, sy, qc)
                    .into_iter()
                    .map(|v| v.into())
                    .collect();
                accumulate_outer_c(&mut qm, wq, &k3, &k4);
            }
            total += c(t) * (w / t) * contract(&self.fs, &pm, &qm);
        }
        total
    }
}

fn evaluator<'a>(
    geo: &DyadicGeometry,
    fs: [&'a GridFunction2D; 4],
    prm: &FormParams,
    quad: &FormQuadrature,
) -> Result<Evaluator<'a>> {
    let n = fs[0].n;
    if let Some(f) = fs.iter().find(|f| f.n != n) {
        return Err(crate::error::LabError::SizeMismatch {
            expected: n,
            got: f.n,
        });
    }
    quad.validate()?;
    Ok(Evaluator {
        n,
        geo: *geo,
        fs,
        prm: *prm,
        quad: *quad,
    })
}

/// The named form summed over a collection of rectangles, with `c(t) = 1`.
pub fn quad_form(
    kind: FormKind,
    geo: &DyadicGeometry,
    region: &[DyadicRectangle],
    fs: [&GridFunction2D; 4],
    prm: &FormParams,
    quad: &FormQuadrature,
) -> Result<Complex64> {
    quad_form_with(kind, geo, region, fs, prm, quad, &|_| {
        Complex64::new(1.0, 0.0)
    })
}

/// `quad_form` with a caller-supplied profile `c(t)`, used by `LambdaUv` only.
pub fn quad_form_with(
    kind: FormKind,
    geo: &DyadicGeometry,
    region: &[DyadicRectangle],
    fs: [&GridFunction2D; 4],
    prm: &FormParams,
    quad: &FormQuadrature,
    c: &dyn Fn(f64) -> Complex64,
) -> Result<Complex64> {
    prm.validate(kind)?;
    for q in region {
        geo.check(q)?;
    }
    let ev = evaluator(geo, fs, prm, quad)?;
    let cone = match kind {
        FormKind::LambdaUv => Some(cone_profile(geo.alpha as f64, 64)?),
        _ => None,
    };
    let mut total = Complex64::new(0.0, 0.0);
    for q in region {
        total += match kind {
            FormKind::Xi => ev.xi(q),
            FormKind::Theta1 => ev.terms(q, true, false).theta1,
            FormKind::Theta2 => ev.terms(q, true, false).theta2,
            FormKind::Bark => ev.terms(q, false, true).bark,
            FormKind::LambdaUv => ev.lambda_uv(q, cone.as_ref().unwrap(), c),
        };
    }
    Ok(total)
}

/// Per-rectangle theta, bark and xi values on the same quadrature.
pub fn rect_terms(
    geo: &DyadicGeometry,
    q: &DyadicRectangle,
    fs: [&GridFunction2D; 4],
    prm: &FormParams,
    quad: &FormQuadrature,
) -> Result<RectTerms> {
    prm.validate(FormKind::Theta1)?;
    geo.check(q)?;
    let ev = evaluator(geo, fs, prm, quad)?;
    let mut t = ev.terms(q, true, true);
    t.xi = ev.xi(q);
    Ok(t)
}

/// Both sides of `a Theta1 + b Theta2 = Xi_leaves - Xi_root + B`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TelescopingReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub xi_root: Complex64,
    pub xi_leaves: Complex64,
    pub bark: Complex64,
    pub residual: f64,
    /// Largest magnitude among the five terms.
    pub scale: f64,
    pub relative: f64,
}

pub fn telescoping_residual(
    t: &Tree,
    fs: [&GridFunction2D; 4],
    prm: &FormParams,
    quad: &FormQuadrature,
) -> Result<TelescopingReport> {
    prm.validate(FormKind::Theta1)?;
    let leaves = tree_leaves(t)?;
    let geo = t.geometry;
    let ev = evaluator(&geo, fs, prm, quad)?;
    let (mut th1, mut th2, mut bark) = (
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    );
    for q in &t.rects {
        let r = ev.terms(q, true, true);
        th1 += r.theta1;
        th2 += r.theta2;
        bark += r.bark;
    }
    let xi_root = ev.xi(&t.root);
    let xi_leaves: Complex64 = leaves.iter().map(|q| ev.xi(q)).sum();
    let lhs = geo.alpha as f64 * th1 + geo.beta as f64 * th2;
    let rhs = xi_leaves - xi_root + bark;
    let residual = (lhs - rhs).norm();
    let scale = [
        geo.alpha as f64 * th1,
        geo.beta as f64 * th2,
        xi_root,
        xi_leaves,
        bark,
    ]
    .iter()
    .map(|z| z.norm())
    .fold(0.0, f64::max);
    let relative = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(TelescopingReport {
        lhs,
        rhs,
        xi_root,
        xi_leaves,
        bark,
        residual,
        scale,
        relative,
    })
}
