//! Row-by-row Calderon-Zygmund decomposition by a dyadic stopping time.

use crate::error::{param, Result};
use crate::torus::GridFunction2D;
use num_complex::Complex64;
use serde::Serialize;

/// A selected interval of cells `start .. start + len` along `x` in one row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CzInterval {
    pub row: usize,
    pub start: usize,
    pub len: usize,
    /// `|I|^{-1/p} ||f||_{L^p(I)}`, the value of `g` on the interval.
    pub average: f64,
    /// Set when the whole row was selected, which has no unselected parent.
    pub top: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberCz {
    pub level: f64,
    pub p: f64,
    #[serde(skip)]
    pub g: GridFunction2D,
    #[serde(skip)]
    pub b: GridFunction2D,
    pub intervals: Vec<Vec<CzInterval>>,
    /// `sup |g|` off the selected intervals; at most `level`.
    pub g_sup_off: f64,
    /// Largest interval average; at most `2^{1/p} level` unless a row is `top`.
    pub g_sup_on: f64,
    /// Area of the union of all intervals in the unit square.
    pub union_measure: f64,
}

fn average(row: &[Complex64], p: f64) -> f64 {
    (row.iter().map(|z| z.norm().powf(p)).sum::<f64>() / row.len() as f64).powf(1.0 / p)
}

fn stop(
    row: &[Complex64],
    start: usize,
    len: usize,
    level: f64,
    p: f64,
    y: usize,
    top: bool,
    out: &mut Vec<CzInterval>,
) {
    let avg = average(&row[start..start + len], p);
    if avg > level {
        out.push(CzInterval {
            row: y,
            start,
            len,
            average: avg,
            top,
        });
    } else if len > 1 {
        let h = len / 2;
        stop(row, start, h, level, p, y, false, out);
        stop(row, start + h, h, level, p, y, false, out);
    }
}

/// Split each row fiber `f(., y) = g_y + b_y` at the maximal dyadic intervals
/// whose `L^p` average exceeds `level`.
pub fn fiber_cz(f: &GridFunction2D, level: f64, p: f64) -> Result<FiberCz> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(param("level", "must be positive and finite"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(param("p", "must be finite and at least 1"));
    }
    let n = f.n;
    let mut g = f.clone();
    let mut intervals = Vec::with_capacity(n);
    let mut covered = 0usize;
    let mut g_sup_on = 0.0f64;
    for y in 0..n {
        let row: Vec<Complex64> = (0..n).map(|x| f.at(x, y)).collect();
        let mut sel = Vec::new();
        stop(&row, 0, n, level, p, y, true, &mut sel);
        for iv in &sel {
            for x in iv.start..iv.start + iv.len {
                g.set(x, y, Complex64::new(iv.average, 0.0));
            }
            covered += iv.len;
            g_sup_on = g_sup_on.max(iv.average);
        }
        intervals.push(sel);
    }
    let mut g_sup_off = 0.0f64;
    for (y, sel) in intervals.iter().enumerate() {
        let mut inside = vec![false; n];
        for iv in sel {
            inside[iv.start..iv.start + iv.len]
                .iter_mut()
                .for_each(|v| *v = true);
        }
        for (x, _) in inside.iter().enumerate().filter(|(_, v)| !**v) {
            g_sup_off = g_sup_off.max(g.at(x, y).norm());
        }
    }
    let b = f.sub(&g);
    Ok(FiberCz {
        level,
        p,
        g,
        b,
        intervals,
        g_sup_off,
        g_sup_on,
        union_measure: covered as f64 / (n * n) as f64,
    })
}
