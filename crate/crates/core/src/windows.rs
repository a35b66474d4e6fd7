//! Smooth cutoffs, Gaussians and the cone profile.
//!
//! All compactly supported cutoffs are assembled from one smooth step
//! `S: [0,1] -> [0,1]`, the normalized running integral of the mollifier
//! `exp(-1/(u(1-u)))`. `S` is tabulated once and evaluated by cubic Hermite
//! interpolation using the mollifier itself as the derivative.

use crate::error::{param, Result};
use crate::quadrature::gauss_legendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

const STEP_CELLS: usize = 4096;

/// Cubic Hermite interpolant of tabulated values and derivatives on a
/// uniform grid.
#[derive(Clone, Debug)]
struct HermiteTable {
    a: f64,
    h: f64,
    vals: Vec<f64>,
    ders: Vec<f64>,
}

impl HermiteTable {
    fn eval(&self, x: f64) -> f64 {
        let m = self.vals.len() - 1;
        let s = ((x - self.a) / self.h).clamp(0.0, m as f64);
        let k = (s.floor() as usize).min(m - 1);
        let u = s - k as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        h00 * self.vals[k]
            + h10 * self.h * self.ders[k]
            + h01 * self.vals[k + 1]
            + h11 * self.h * self.ders[k + 1]
    }

    /// Table of `F(x) = int_a^x f` on `[a, b]` from the integrand alone.
    fn running_integral(a: f64, b: f64, cells: usize, f: impl Fn(f64) -> f64) -> Self {
        let (gx, gw) = gauss_legendre(10);
        let h = (b - a) / cells as f64;
        let mut vals = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        vals.push(0.0);
        for k in 0..cells {
            let c = a + (k as f64 + 0.5) * h;
            acc += gx
                .iter()
                .zip(&gw)
                .map(|(x, w)| 0.5 * h * w * f(c + 0.5 * h * x))
                .sum::<f64>();
            vals.push(acc);
        }
        let ders = (0..=cells).map(|k| f(a + k as f64 * h)).collect();
        Self { a, h, vals, ders }
    }
}

fn mollifier(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

fn step_table() -> &'static HermiteTable {
    static T: OnceLock<HermiteTable> = OnceLock::new();
    T.get_or_init(|| {
        let raw = HermiteTable::running_integral(0.0, 1.0, STEP_CELLS, mollifier);
        let z = *raw.vals.last().unwrap();
        HermiteTable {
            vals: raw.vals.iter().map(|v| v / z).collect(),
            ders: raw.ders.iter().map(|d| d / z).collect(),
            ..raw
        }
    })
}

/// Smooth step: 0 for `s <= 0`, 1 for `s >= 1`, `S(s) + S(1 - s) = 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else if s <= 0.5 {
        step_table().eval(s)
    } else {
        1.0 - step_table().eval(1.0 - s)
    }
}

/// Equal to 1 on `[-1, 1]`, 0 outside `[-2, 2]`.
pub fn plateau_phi(z: f64) -> f64 {
    smooth_step(2.0 - z.abs())
}

/// `phi(z) - phi(2z)`, supported on `1/2 <= |z| <= 2`.
pub fn annulus_psi(z: f64) -> f64 {
    plateau_phi(z) - plateau_phi(2.0 * z)
}

/// Width of the collar around the annulus where `annulus_psi_tilde` decays.
pub const PSI_TILDE_COLLAR: f64 = 0.01;

/// Equal to 1 on the support of `annulus_psi`, supported within a
/// `PSI_TILDE_COLLAR` neighbourhood of it.
pub fn annulus_psi_tilde(z: f64) -> f64 {
    let a = z.abs();
    let d = PSI_TILDE_COLLAR;
    if a < 0.5 {
        smooth_step((a - (0.5 - d)) / d)
    } else if a <= 2.0 {
        1.0
    } else {
        smooth_step((2.0 + d - a) / d)
    }
}

pub fn gauss_g(x: f64) -> f64 {
    (-PI * x * x).exp()
}

/// Derivative of `gauss_g`.
pub fn gauss_h(x: f64) -> f64 {
    -2.0 * PI * x * (-PI * x * x).exp()
}

/// `(1 + |x|)^{-10}`; its integral is `2/9`.
pub fn decay_theta(x: f64) -> f64 {
    (1.0 + x.abs()).powi(-10)
}

/// Antiderivative of `decay_theta` vanishing at 0.
pub fn decay_theta_primitive(x: f64) -> f64 {
    x.signum() * (1.0 - (1.0 + x.abs()).powi(-9)) / 9.0
}

/// Even, supported on `[-2, 2]`, constant on `[-1, 1]`, unit integral.
/// This is `plateau_phi / 3`; the plateau has integral exactly 3 because
/// `S(s) + S(1 - s) = 1`.
pub fn mollifier_theta(x: f64) -> f64 {
    plateau_phi(x) / 3.0
}

/// Supported on `[1/2, 2]`, values in `[0, 1]`, unit integral: a plateau on
/// `[1/2, 2]` with ramps of one third of the support length, whose area is
/// `(3/2)(1 - 1/3) = 1`.
pub fn bump_tau(x: f64) -> f64 {
    let u = (x - 0.5) / 1.5;
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    let w = 1.0 / 3.0;
    smooth_step(u / w) * smooth_step((1.0 - u) / w)
}

/// Half-width of the overlap collar of `spatial_eta`.
pub const ETA_COLLAR: f64 = 0.05;

/// Nonnegative, supported in `[-1/2 - c, 1/2 + c]`, and its integer
/// translates sum to 1.
pub fn spatial_eta(z: f64) -> f64 {
    let c = ETA_COLLAR;
    smooth_step((0.5 + c - z.abs()) / (2.0 * c))
}

/// Supported in `[-1, 1]` with `sum_n w(x + n) = 1`; equal to
/// `plateau_phi(1 + |x|)`.
pub fn unit_partition(x: f64) -> f64 {
    plateau_phi(1.0 + x.abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    PlateauPhi,
    AnnulusPsi,
    AnnulusPsiTilde,
    GaussG,
    GaussH,
    DecayTheta,
    MollifierTheta,
    BumpTau,
    SpatialEta,
    UnitPartition,
}

impl WindowKind {
    pub const ALL: [WindowKind; 10] = [
        WindowKind::PlateauPhi,
        WindowKind::AnnulusPsi,
        WindowKind::AnnulusPsiTilde,
        WindowKind::GaussG,
        WindowKind::GaussH,
        WindowKind::DecayTheta,
        WindowKind::MollifierTheta,
        WindowKind::BumpTau,
        WindowKind::SpatialEta,
        WindowKind::UnitPartition,
    ];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            WindowKind::PlateauPhi => plateau_phi(x),
            WindowKind::AnnulusPsi => annulus_psi(x),
            WindowKind::AnnulusPsiTilde => annulus_psi_tilde(x),
            WindowKind::GaussG => gauss_g(x),
            WindowKind::GaussH => gauss_h(x),
            WindowKind::DecayTheta => decay_theta(x),
            WindowKind::MollifierTheta => mollifier_theta(x),
            WindowKind::BumpTau => bump_tau(x),
            WindowKind::SpatialEta => spatial_eta(x),
            WindowKind::UnitPartition => unit_partition(x),
        }
    }

    /// Interval containing the support, or a plotting range for windows
    /// without compact support.
    pub fn range(self) -> (f64, f64) {
        match self {
            WindowKind::PlateauPhi | WindowKind::MollifierTheta | WindowKind::AnnulusPsi => {
                (-2.0, 2.0)
            }
            WindowKind::AnnulusPsiTilde => (-2.0 - PSI_TILDE_COLLAR, 2.0 + PSI_TILDE_COLLAR),
            WindowKind::GaussG | WindowKind::GaussH => (-6.0, 6.0),
            WindowKind::DecayTheta => (-16.0, 16.0),
            WindowKind::BumpTau => (0.5, 2.0),
            WindowKind::SpatialEta => (-0.5 - ETA_COLLAR, 0.5 + ETA_COLLAR),
            WindowKind::UnitPartition => (-1.0, 1.0),
        }
    }
}

/// `s^{-1} w((x - c)/s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledWindow {
    pub kind: WindowKind,
    pub scale: f64,
    pub center: f64,
}

impl ScaledWindow {
    pub fn eval(&self, x: f64) -> f64 {
        self.kind.eval((x - self.center) / self.scale) / self.scale
    }
}

/// Equispaced tabulation of a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledWindow {
    pub kind: WindowKind,
    pub lo: f64,
    pub hi: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Node count of the exported tabulations.
pub const EXPORT_NODES: usize = 1 << 14;

impl SampledWindow {
    pub fn tabulate(kind: WindowKind, nodes: usize) -> Self {
        let (lo, hi) = kind.range();
        let h = (hi - lo) / (nodes - 1) as f64;
        let x: Vec<f64> = (0..nodes).map(|k| lo + k as f64 * h).collect();
        let y = x.iter().map(|&v| kind.eval(v)).collect();
        Self { kind, lo, hi, x, y }
    }

    /// Trapezoid integral of the tabulation.
    pub fn integral(&self) -> f64 {
        let h = (self.hi - self.lo) / (self.x.len() - 1) as f64;
        let inner: f64 = self.y.iter().sum();
        h * (inner - 0.5 * (self.y[0] + self.y[self.y.len() - 1]))
    }
}

/// Export every window at `EXPORT_NODES` nodes as one JSON document.
pub fn export_tabulations() -> Result<String> {
    let all: Vec<SampledWindow> = WindowKind::ALL
        .iter()
        .map(|&k| SampledWindow::tabulate(k, EXPORT_NODES))
        .collect();
    Ok(serde_json::to_string(&all)?)
}

fn psi_h2_over_u(u: f64) -> f64 {
    let h = gauss_h(u);
    annulus_psi(u) * h * h / u
}

/// Radial profile `xi -> int_1^inf psi(s^a xi) h(s^a xi)^2 ds/s` for the
/// cone decomposition, with its limiting constant `int_0^inf (same) ds/s`.
///
/// After `u = s^a |xi|` the profile is `(1/a) int_{|xi|}^2 psi(u) h(u)^2 du/u`,
/// which is tabulated once per exponent.
#[derive(Clone, Debug)]
pub struct ConeProfile {
    pub alpha: f64,
    pub constant: f64,
    table: HermiteTable,
    total: f64,
}

impl ConeProfile {
    pub fn eval(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 0.5 {
            self.constant
        } else if a >= 2.0 {
            0.0
        } else {
            (self.total - self.table.eval(a)) / self.alpha
        }
    }
}

/// Build the cone profile for exponent `alpha`. The constant is evaluated
/// from the defining `dt/t` integral at `xi = 1` with `nodes_per_shell`
/// log-uniform nodes per dyadic shell; fewer than 16 is rejected.
pub fn cone_profile(alpha: f64, nodes_per_shell: usize) -> Result<ConeProfile> {
    if !(alpha > 0.0) {
        return Err(param("alpha", "must be positive"));
    }
    let constant = cone_constant_at(alpha, 1.0, nodes_per_shell)?;
    let table = HermiteTable::running_integral(0.5, 2.0, 2048, psi_h2_over_u);
    let total = *table.vals.last().unwrap();
    Ok(ConeProfile {
        alpha,
        constant,
        table,
        total,
    })
}

/// `int_0^inf psi(t^a xi) h(t^a xi)^2 dt/t` by a midpoint rule in `log t`.
pub fn cone_constant_at(alpha: f64, xi: f64, nodes_per_shell: usize) -> Result<f64> {
    if nodes_per_shell < crate::quadrature::MIN_NODES_PER_SHELL {
        return Err(param(
            "nodes_per_shell",
            format!("{nodes_per_shell} is below 16"),
        ));
    }
    if xi == 0.0 {
        return Err(param("xi", "profile constant needs xi != 0"));
    }
    let x = xi.abs();
    // t^a x ranges over [1/2, 2]: log t in [(-ln2 - ln x)/a, (ln2 - ln x)/a].
    let lo = (-(2f64.ln()) - x.ln()) / alpha;
    let hi = (2f64.ln() - x.ln()) / alpha;
    let shells = ((hi - lo) / 2f64.ln()).ceil() as usize;
    let m = shells * nodes_per_shell;
    let h = (hi - lo) / m as f64;
    let s: f64 = (0..m)
        .map(|k| {
            let u = (alpha * (lo + (k as f64 + 0.5) * h)).exp() * x;
            let g = gauss_h(u);
            annulus_psi(u) * g * g
        })
        .sum();
    Ok(s * h)
}
