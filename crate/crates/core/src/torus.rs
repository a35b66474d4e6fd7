//! Sampled functions on the unit torus and their discrete Fourier data.
//!
//! A grid function of size `n` holds samples at `(i/n, j/n)`, stored row-major
//! with the x index outermost: `values[i * n + j]`. The forward transform
//! carries the `1/n^2` factor, so coefficients approximate the Fourier
//! coefficients of the underlying periodic function, and frequencies are
//! signed in `[-n/2, n/2)`.

use crate::error::{param, LabError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// First coordinate (x), index `i`.
    X,
    /// Second coordinate (y), index `j`.
    Y,
}

impl Axis {
    pub fn from_index(k: usize) -> Result<Axis> {
        match k {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            _ => Err(param("axis", format!("expected 1 or 2, got {k}"))),
        }
    }
}

pub fn check_size(n: usize) -> Result<()> {
    if n >= 4 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(LabError::GridSize(n))
    }
}

/// Signed frequency of FFT slot `k`.
#[inline]
pub fn freq(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT slot of signed frequency `xi` (taken modulo `n`).
#[inline]
pub fn slot(xi: i64, n: usize) -> usize {
    xi.rem_euclid(n as i64) as usize
}

#[inline]
pub fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized FFT of every line of an `n x n` array along `axis`.
pub(crate) fn fft_axis(data: &mut [Complex64], n: usize, axis: Axis, inverse: bool) {
    let fft = plan(n, inverse);
    match axis {
        Axis::Y => fft.process(data),
        Axis::X => {
            transpose(data, n);
            fft.process(data);
            transpose(data, n);
        }
    }
}

pub(crate) fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Samples of a function on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction1D {
    pub n: usize,
    pub values: Vec<Complex64>,
}

/// Coefficients of a 1D grid function, stored in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum1D {
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

impl GridFunction1D {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if values.len() != n {
            return Err(LabError::SizeMismatch {
                expected: n,
                got: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            n,
            values: (0..n).map(|i| f(i as f64 / n as f64)).collect(),
        })
    }

    pub fn from_real(n: usize, values: &[f64]) -> Result<Self> {
        Self::new(n, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn forward(&self) -> Spectrum1D {
        let mut c = self.values.clone();
        plan(self.n, false).process(&mut c);
        let s = 1.0 / self.n as f64;
        c.iter_mut().for_each(|z| *z *= s);
        Spectrum1D {
            n: self.n,
            coeffs: c,
        }
    }

    /// `g(x + t)` through the trigonometric interpolant.
    pub fn shift(&self, t: f64) -> GridFunction1D {
        let mut s = self.forward();
        s.modulate(t);
        s.inverse()
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        lp_norm(&self.values, p)
    }

    pub fn abs(&self) -> GridFunction1D {
        GridFunction1D {
            n: self.n,
            values: self
                .values
                .iter()
                .map(|z| Complex64::new(z.norm(), 0.0))
                .collect(),
        }
    }
}

impl Spectrum1D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn get(&self, xi: i64) -> Complex64 {
        self.coeffs[slot(xi, self.n)]
    }

    pub fn set(&mut self, xi: i64, v: Complex64) {
        let n = self.n;
        self.coeffs[slot(xi, n)] = v;
    }

    /// Multiply by `e^{2 pi i xi t}` (a translation by `t`).
    pub fn modulate(&mut self, t: f64) {
        let n = self.n;
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            *c *= phase(freq(k, n) as f64 * t);
        }
    }

    pub fn apply_multiplier(&mut self, m: impl Fn(i64) -> f64) {
        let n = self.n;
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(freq(k, n));
        }
    }

    pub fn inverse(&self) -> GridFunction1D {
        let mut v = self.coeffs.clone();
        plan(self.n, true).process(&mut v);
        GridFunction1D {
            n: self.n,
            values: v,
        }
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Samples of a function on the unit torus.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction2D {
    pub n: usize,
    pub values: Vec<Complex64>,
}

/// Coefficients of a 2D grid function, FFT order in both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    pub n: usize,
    pub coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl GridFunction2D {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if values.len() != n * n {
            return Err(LabError::SizeMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![Complex64::new(0.0, 0.0); n * n])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, vec![Complex64::new(c, 0.0); n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> Complex64) -> Result<Self> {
        check_size(n)?;
        let h = 1.0 / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i as f64 * h, j as f64 * h));
            }
        }
        Ok(Self { n, values })
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        Self::from_fn(n, |x, y| Complex64::new(f(x, y), 0.0))
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let n = self.n;
        self.values[i * n + j] = v;
    }

    /// Value at the cell nearest to `(x, y)` with periodic wrap.
    pub fn nearest(&self, x: f64, y: f64) -> Complex64 {
        let n = self.n as f64;
        let i = ((x * n + 0.5).floor() as i64).rem_euclid(self.n as i64) as usize;
        let j = ((y * n + 0.5).floor() as i64).rem_euclid(self.n as i64) as usize;
        self.at(i, j)
    }

    /// Row `f(., y_j)` as a function of x.
    pub fn fiber_x(&self, j: usize) -> GridFunction1D {
        GridFunction1D {
            n: self.n,
            values: (0..self.n).map(|i| self.at(i, j)).collect(),
        }
    }

    /// Column `f(x_i, .)` as a function of y.
    pub fn fiber_y(&self, i: usize) -> GridFunction1D {
        let n = self.n;
        GridFunction1D {
            n,
            values: self.values[i * n..(i + 1) * n].to_vec(),
        }
    }

    pub fn forward(&self) -> Spectrum2D {
        let n = self.n;
        let mut c = self.values.clone();
        fft_axis(&mut c, n, Axis::Y, false);
        fft_axis(&mut c, n, Axis::X, false);
        let s = 1.0 / (n * n) as f64;
        c.iter_mut().for_each(|z| *z *= s);
        Spectrum2D { n, coeffs: c }
    }

    /// Translation by `t` along `axis` through the trigonometric interpolant.
    pub fn shift(&self, t: f64, axis: Axis) -> GridFunction2D {
        AxisSpectrum::new(self, axis).shifted(t)
    }

    /// Difference function `f(. + s e_axis) * conj(f)`.
    pub fn diff(&self, s: f64, axis: Axis) -> GridFunction2D {
        let shifted = self.shift(s, axis);
        self.zip(&shifted, |a, b| b * a.conj())
    }

    /// Riemann-sum `L^p` norm; `p = f64::INFINITY` gives the sup norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        lp_norm(&self.values, p)
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / (self.n * self.n) as f64
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFunction2D {
        GridFunction2D {
            n: self.n,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip(
        &self,
        other: &GridFunction2D,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> GridFunction2D {
        assert_eq!(self.n, other.n, "grid sizes differ");
        GridFunction2D {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn abs(&self) -> GridFunction2D {
        self.map(|z| Complex64::new(z.norm(), 0.0))
    }

    pub fn scale(&self, s: f64) -> GridFunction2D {
        self.map(|z| z * s)
    }

    pub fn add(&self, other: &GridFunction2D) -> GridFunction2D {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction2D) -> GridFunction2D {
        self.zip(other, |a, b| a - b)
    }

    pub fn max_abs_diff(&self, other: &GridFunction2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let g = GridJson {
            n: self.n,
            re: self.values.iter().map(|z| z.re).collect(),
            im: self.values.iter().map(|z| z.im).collect(),
        };
        Ok(serde_json::to_string(&g)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let g: GridJson = serde_json::from_str(s)?;
        if g.re.len() != g.im.len() {
            return Err(LabError::Parse("re and im lengths differ".into()));
        }
        let values =
            g.re.iter()
                .zip(&g.im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect();
        Self::new(g.n, values)
    }

    /// CSV rows `i,j,re,im` with a header line.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "re", "im"])?;
        for i in 0..self.n {
            for j in 0..self.n {
                let z = self.at(i, j);
                wr.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{:?}", z.re),
                    format!("{:?}", z.im),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let get = |k: usize| {
                rec.get(k)
                    .ok_or_else(|| LabError::Parse(format!("missing column {k}")))
            };
            let i: usize = get(0)?
                .trim()
                .parse()
                .map_err(|e| LabError::Parse(format!("{e}")))?;
            let j: usize = get(1)?
                .trim()
                .parse()
                .map_err(|e| LabError::Parse(format!("{e}")))?;
            let re: f64 = get(2)?
                .trim()
                .parse()
                .map_err(|e| LabError::Parse(format!("{e}")))?;
            let im: f64 = get(3)?
                .trim()
                .parse()
                .map_err(|e| LabError::Parse(format!("{e}")))?;
            rows.push((i, j, Complex64::new(re, im)));
        }
        let n = (rows.len() as f64).sqrt().round() as usize;
        if n * n != rows.len() {
            return Err(LabError::Parse(format!(
                "{} rows is not a square grid",
                rows.len()
            )));
        }
        let mut f = Self::zeros(n)?;
        let mut seen = vec![false; n * n];
        for (i, j, z) in rows {
            if i >= n || j >= n || seen[i * n + j] {
                return Err(LabError::Parse(format!("bad or repeated index ({i},{j})")));
            }
            seen[i * n + j] = true;
            f.set(i, j, z);
        }
        Ok(f)
    }
}

impl Spectrum2D {
    pub fn zeros(n: usize) -> Result<Self> {
        check_size(n)?;
        Ok(Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    #[inline]
    pub fn get(&self, xi1: i64, xi2: i64) -> Complex64 {
        self.coeffs[slot(xi1, self.n) * self.n + slot(xi2, self.n)]
    }

    #[inline]
    pub fn set(&mut self, xi1: i64, xi2: i64, v: Complex64) {
        let n = self.n;
        self.coeffs[slot(xi1, n) * n + slot(xi2, n)] = v;
    }

    pub fn inverse(&self) -> GridFunction2D {
        let n = self.n;
        let mut v = self.coeffs.clone();
        fft_axis(&mut v, n, Axis::Y, true);
        fft_axis(&mut v, n, Axis::X, true);
        GridFunction2D { n, values: v }
    }

    pub fn apply_multiplier(&mut self, m: impl Fn(i64, i64) -> f64) {
        let n = self.n;
        for k1 in 0..n {
            for k2 in 0..n {
                self.coeffs[k1 * n + k2] *= m(freq(k1, n), freq(k2, n));
            }
        }
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A grid function transformed along one axis only, ready for repeated
/// translations along that axis. Each translation costs `n` line FFTs.
#[derive(Clone, Debug)]
pub struct AxisSpectrum {
    n: usize,
    axis: Axis,
    partial: Vec<Complex64>,
}

impl AxisSpectrum {
    pub fn new(f: &GridFunction2D, axis: Axis) -> Self {
        let n = f.n;
        let mut partial = f.values.clone();
        if axis == Axis::X {
            transpose(&mut partial, n);
        }
        plan(n, false).process(&mut partial);
        let s = 1.0 / n as f64;
        partial.iter_mut().for_each(|z| *z *= s);
        Self { n, axis, partial }
    }

    /// `f(. + t e_axis)`.
    pub fn shifted(&self, t: f64) -> GridFunction2D {
        let n = self.n;
        let ph: Vec<Complex64> = (0..n).map(|k| phase(freq(k, n) as f64 * t)).collect();
        let mut out = self.partial.clone();
        for line in out.chunks_mut(n) {
            for (z, p) in line.iter_mut().zip(&ph) {
                *z *= p;
            }
        }
        plan(n, true).process(&mut out);
        if self.axis == Axis::X {
            transpose(&mut out, n);
        }
        GridFunction2D { n, values: out }
    }

    /// Multiply along the axis by `m(xi)` and return to samples.
    pub fn filtered(&self, m: impl Fn(i64) -> Complex64) -> GridFunction2D {
        let n = self.n;
        let mv: Vec<Complex64> = (0..n).map(|k| m(freq(k, n))).collect();
        let mut out = self.partial.clone();
        for line in out.chunks_mut(n) {
            for (z, p) in line.iter_mut().zip(&mv) {
                *z *= p;
            }
        }
        plan(n, true).process(&mut out);
        if self.axis == Axis::X {
            transpose(&mut out, n);
        }
        GridFunction2D { n, values: out }
    }

    /// Partial coefficient at frequency `xi` along the axis and position
    /// index `other` on the remaining axis.
    pub fn coeff(&self, xi: i64, other: usize) -> Complex64 {
        self.partial[other * self.n + slot(xi, self.n)]
    }
}

pub(crate) fn lp_norm(values: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let m = values.len() as f64;
    let s: f64 = values.iter().map(|z| z.norm().powf(p)).sum::<f64>() / m;
    s.powf(1.0 / p)
}
