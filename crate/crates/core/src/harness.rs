//! Experiment driver behind the `trilab` binary. A [`RunConfig`] names a
//! command and its parameters; [`run`] computes a [`Report`] plus CSV tables,
//! and [`execute`] also writes them under `out`.
//!
//! Every random draw comes from `rng::stream(seed, keys)` with keys fixed
//! per command and trial, so reports depend only on the configuration.

use crate::error::{param, Result};
use crate::littlewood_paley::{j_max, telescoping_residual as lp_telescoping};
use crate::paraproduct::{
    random_convex_tree, telescoping_residual, DyadicGeometry, FormParams, FormQuadrature,
};
use crate::patterns::{
    count_profile, dichotomy_run, lower_bound_check, martingale_avg, pattern_search,
    write_dichotomy_csv, BitmapSet, Branch, DichotomyThresholds,
};
use crate::quadrature::ShellQuadrature;
use crate::report::{write_outputs, Check, Metadata, Report, Table};
use crate::rng::{self, LabRng};
use crate::singular_ops::{default_s_range, maximal, shifted_maximal, truncated_t, CutoffSpec};
use crate::smoothing_lab::{
    adversarial_pair, autocorr_energy, autocorr_energy_shifts, decay_fit, sharp_flat_split,
    sublevel_fit, BandLimitSpec, BandMode, SharpFlatParams, SublevelBox, SublevelGrid,
};
use crate::torus::{Axis, GridFunction1D, GridFunction2D, Spectrum2D};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    NormEstimate,
    DecayFit,
    TelescopeCheck,
    SublevelFit,
    PatternSearch,
    Dichotomy,
    LowerBoundSweep,
    IdentitySuite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::NormEstimate => "norm-estimate",
            Command::DecayFit => "decay-fit",
            Command::TelescopeCheck => "telescope-check",
            Command::SublevelFit => "sublevel-fit",
            Command::PatternSearch => "pattern-search",
            Command::Dichotomy => "dichotomy",
            Command::LowerBoundSweep => "lower-bound-sweep",
            Command::IdentitySuite => "identity-suite",
        }
    }

    /// Grid side used when `n` is not given.
    pub fn default_n(self) -> usize {
        match self {
            Command::DecayFit => 256,
            Command::TelescopeCheck => 16,
            Command::Dichotomy => 64,
            _ => 32,
        }
    }
}

/// `norm-estimate`: empirical `||T(f1, f2)||_1 / (||f1||_2 ||f2||_2)` and the
/// maximal analogue over grid sizes, plus the shifted maximal growth sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormParams {
    pub ns: Vec<usize>,
    /// Inputs carry Gaussian coefficients on `|xi|, |eta| <= band`; `None`
    /// means `n / 4` at each size.
    pub band: Option<i64>,
    pub quad: ShellQuadrature,
    /// Largest allowed ratio between consecutive sizes.
    pub growth_limit: f64,
    pub shifted_n: usize,
    pub shifted_trials: usize,
    pub sigmas: Vec<f64>,
    /// The constant is fitted on `sigma <= fit_sigma_max`.
    pub fit_sigma_max: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            ns: vec![32, 64, 128],
            band: None,
            quad: ShellQuadrature::default(),
            growth_limit: 1.5,
            shifted_n: 1024,
            shifted_trials: 20,
            sigmas: std::iter::once(0.0)
                .chain((0..=8).map(|k| 2f64.powi(k)))
                .collect(),
            fit_sigma_max: 16.0,
        }
    }
}

/// `decay-fit`: a conforming pair of bands and a control pair violating the
/// band hypothesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayParams {
    pub lambdas: Vec<f64>,
    pub zeta: CutoffSpec,
    pub conforming: (BandLimitSpec, BandLimitSpec),
    pub control: (BandLimitSpec, BandLimitSpec),
    pub control_slope_limit: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        let b = |axis, mode, cross_width| BandLimitSpec {
            axis,
            lambda: 4.0,
            mode,
            cross_width,
        };
        Self {
            lambdas: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            zeta: CutoffSpec::default(),
            conforming: (
                b(Axis::X, BandMode::Annulus, 2),
                b(Axis::Y, BandMode::Lowpass, 2),
            ),
            control: (
                b(Axis::Y, BandMode::Modulated { width: 2 }, 0),
                b(Axis::X, BandMode::Modulated { width: 2 }, 2),
            ),
            control_slope_limit: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelescopeParams {
    pub max_depth: i32,
    pub p_child: f64,
    pub form: FormParams,
    pub quad: FormQuadrature,
    pub tolerance: f64,
}

impl Default for TelescopeParams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            p_child: 0.3,
            form: FormParams::default(),
            quad: FormQuadrature::default(),
            tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SublevelParams {
    pub max_depth: u32,
    pub epsilons: Vec<f64>,
    pub region: SublevelBox,
    pub grid: SublevelGrid,
    pub min_slope: f64,
}

impl Default for SublevelParams {
    fn default() -> Self {
        Self {
            max_depth: 3,
            epsilons: (1..=8).map(|k| 2f64.powi(-k)).collect(),
            region: SublevelBox::default(),
            grid: SublevelGrid::default(),
            min_slope: 0.05,
        }
    }
}

/// Input set for `pattern-search` and `dichotomy` when no bitmap is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternParams {
    pub t_min: Option<f64>,
    pub density: f64,
}

impl Default for PatternParams {
    fn default() -> Self {
        Self {
            t_min: None,
            density: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyParams {
    pub k0: u32,
    pub m_factor: u32,
    pub max_iter: usize,
    pub thresholds: DichotomyThresholds,
}

impl Default for DichotomyParams {
    fn default() -> Self {
        Self {
            k0: 1,
            m_factor: 2,
            max_iter: 8,
            thresholds: DichotomyThresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub ns: Vec<usize>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            ns: vec![16, 32, 64],
        }
    }
}

/// Full run configuration. Unknown keys are rejected at every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    /// Grid side; `None` picks [`Command::default_n`].
    pub n: Option<usize>,
    pub seed: u64,
    pub out: PathBuf,
    /// PBM or JSON bitmap for `pattern-search` and `dichotomy`.
    pub bitmap: Option<PathBuf>,
    /// Trial count; defaults are 50 (norms, decay), 10 (trees), 20 (sublevel
    /// pairs), 1000 (sweep, per size), 3 (identity inputs).
    pub trials: Option<usize>,
    pub norm: NormParams,
    pub decay: DecayParams,
    pub telescope: TelescopeParams,
    pub sublevel: SublevelParams,
    pub pattern: PatternParams,
    pub dichotomy: DichotomyParams,
    pub sweep: SweepParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::IdentitySuite,
            n: None,
            seed: 1,
            out: PathBuf::from("out"),
            bitmap: None,
            trials: None,
            norm: NormParams::default(),
            decay: DecayParams::default(),
            telescope: TelescopeParams::default(),
            sublevel: SublevelParams::default(),
            pattern: PatternParams::default(),
            dichotomy: DichotomyParams::default(),
            sweep: SweepParams::default(),
        }
    }
}

impl RunConfig {
    pub fn for_command(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn grid_n(&self) -> usize {
        self.n.unwrap_or(self.command.default_n())
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

/// Result of [`run`]: the report and its tables.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub tables: Vec<Table>,
}

/// Stream tags, one per experiment.
const NORM_TAG: u64 = 0x4E4F;
const SHIFT_TAG: u64 = 0x5348;
const TREE_TAG: u64 = 0x5452;
const SUBLEVEL_TAG: u64 = 0x5355;
const BITMAP_TAG: u64 = 0x4249;
const SWEEP_TAG: u64 = 0x5357;
const IDENTITY_TAG: u64 = 0x4944;

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// Run a command without touching the file system (except to read
/// `bitmap`).
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let (result, checks, tables) = match cfg.command {
        Command::NormEstimate => norm_estimate(cfg)?,
        Command::DecayFit => decay(cfg)?,
        Command::TelescopeCheck => telescope(cfg)?,
        Command::SublevelFit => sublevel(cfg)?,
        Command::PatternSearch => patterns(cfg)?,
        Command::Dichotomy => dichotomy(cfg)?,
        Command::LowerBoundSweep => lower_bound_sweep(cfg)?,
        Command::IdentitySuite => identity_suite(cfg)?,
    };
    let report = Report::new(
        cfg.command.name(),
        serde_json::to_value(cfg)?,
        result,
        checks,
    );
    Ok(RunOutput { report, tables })
}

/// Run and write `report.json`, `metadata.json` and `tables/*.csv` under
/// `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();
    let out = run(cfg)?;
    let meta = Metadata {
        version: env!("CARGO_PKG_VERSION"),
        started_unix_ms: started,
        elapsed_ms: clock.elapsed().as_millis(),
    };
    write_outputs(&cfg.out, &out.report, &out.tables, &meta)?;
    Ok(out)
}

/// Process exit status: 0 when every check passed, 2 otherwise.
pub fn exit_status(report: &Report) -> i32 {
    if report.passed {
        0
    } else {
        2
    }
}

type Outcome = (serde_json::Value, Vec<Check>, Vec<Table>);

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Gaussian coefficients on `|xi|, |eta| <= band`, drawn in a fixed order so
/// that one stream gives the same trigonometric polynomial on every grid.
fn band_limited(n: usize, band: i64, rng: &mut LabRng) -> Result<GridFunction2D> {
    if !(band >= 1 && band < (n / 2) as i64) {
        return Err(param(
            "band",
            format!("need 1 <= band < n/2, got {band} at n = {n}"),
        ));
    }
    let mut s = Spectrum2D::zeros(n)?;
    for a in -band..=band {
        for b in -band..=band {
            s.set(a, b, rng::complex_normal(rng));
        }
    }
    Ok(s.inverse())
}

fn norm_estimate(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.norm;
    p.quad.validate()?;
    if p.ns.len() < 2 {
        return Err(param("norm.ns", "need at least two grid sizes"));
    }
    let trials = cfg.trials_or(50);
    let mut table = Table::new("norms", &["n", "operator", "ratio_max", "ratio_median"]);
    let mut rows = Vec::new();
    for &n in &p.ns {
        let band = p.band.unwrap_or((n / 4) as i64);
        let (mut t_ratios, mut m_ratios) = (Vec::new(), Vec::new());
        for trial in 0..trials {
            let mut r = rng::stream(cfg.seed, &[NORM_TAG, trial as u64]);
            let f1 = band_limited(n, band, &mut r)?;
            let f2 = band_limited(n, band, &mut r)?;
            let denom = f1.norm_lp(2.0) * f2.norm_lp(2.0);
            t_ratios.push(truncated_t(&f1, &f2, &p.quad)?.norm_lp(1.0) / denom);
            m_ratios.push(maximal(&f1, &f2, &p.quad)?.norm_lp(1.0) / denom);
        }
        for (name, v) in [("truncated", &t_ratios), ("maximal", &m_ratios)] {
            let mx = v.iter().cloned().fold(0.0, f64::max);
            let md = median(v.clone());
            table.push(vec![n.to_string(), name.into(), fmt(mx), fmt(md)]);
            rows.push(json!({"n": n, "operator": name, "band": band, "ratio_max": mx, "ratio_median": md}));
        }
    }
    let mut checks = Vec::new();
    for (op, col) in [("truncated", 0usize), ("maximal", 1)] {
        let maxes: Vec<f64> = rows
            .iter()
            .skip(col)
            .step_by(2)
            .map(|r| r["ratio_max"].as_f64().unwrap())
            .collect();
        let growth = maxes.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        checks.push(Check::at_most(
            format!("{op}_ratio_growth"),
            growth,
            p.growth_limit,
        ));
    }

    // Shifted maximal growth against C log(2 + sigma)^{1/2}.
    let sn = p.shifted_n;
    crate::torus::check_size(sn)?;
    let mut worst = vec![0.0f64; p.sigmas.len()];
    for trial in 0..p.shifted_trials {
        let mut r = rng::stream(cfg.seed, &[SHIFT_TAG, trial as u64]);
        let g = GridFunction1D::from_fn(sn, |_| Complex64::new(rng::normal(&mut r), 0.0))?;
        let gn = g.norm_lp(2.0);
        for (w, &s) in worst.iter_mut().zip(&p.sigmas) {
            *w = w.max(shifted_maximal(&g, s, default_s_range(sn))?.norm_lp(2.0) / gn);
        }
    }
    let envelope = |s: f64| (2.0 + s).ln().sqrt();
    let c = p
        .sigmas
        .iter()
        .zip(&worst)
        .filter(|(s, _)| **s <= p.fit_sigma_max)
        .map(|(s, w)| w / envelope(*s))
        .fold(0.0, f64::max);
    let mut shifted = Table::new("shifted_maximal", &["sigma", "ratio_max", "bound"]);
    // Only sigmas outside the fitting range can exceed the envelope.
    let mut excess = 0.0f64;
    for (&s, &w) in p.sigmas.iter().zip(&worst) {
        shifted.push(vec![fmt(s), fmt(w), fmt(c * envelope(s))]);
        if s > p.fit_sigma_max {
            excess = excess.max(w / (c * envelope(s)));
        }
    }
    checks.push(Check::at_most(
        "shifted_maximal_over_fitted_envelope",
        excess,
        1.0,
    ));
    let result = json!({
        "trials": trials,
        "quad": p.quad,
        "norms": rows,
        "shifted_maximal": {"n": sn, "trials": p.shifted_trials, "sigmas": p.sigmas, "ratio_max": worst, "fitted_c": c},
    });
    Ok((result, checks, vec![table, shifted]))
}

fn decay(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.decay;
    let n = cfg.grid_n();
    let trials = cfg.trials_or(50);
    let conf = decay_fit(
        n,
        &p.conforming.0,
        &p.conforming.1,
        &p.lambdas,
        trials,
        &p.zeta,
        cfg.seed,
    )?;
    let ctrl = decay_fit(
        n,
        &p.control.0,
        &p.control.1,
        &p.lambdas,
        trials,
        &p.zeta,
        cfg.seed,
    )?;
    let mut table = Table::new("decay", &["run", "lambda", "median", "max"]);
    for (name, rep) in [("conforming", &conf), ("control", &ctrl)] {
        for i in 0..rep.lambdas.len() {
            table.push(vec![
                name.into(),
                fmt(rep.lambdas[i]),
                fmt(rep.medians[i]),
                fmt(rep.maxima[i]),
            ]);
        }
    }
    let checks = vec![
        Check::greater_than("conforming_sigma", conf.sigma, 0.0),
        Check::less_than("control_abs_slope", ctrl.slope.abs(), p.control_slope_limit),
    ];
    Ok((
        json!({"n": n, "conforming": conf, "control": ctrl}),
        checks,
        vec![table],
    ))
}

fn smooth_input(n: usize, rng: &mut LabRng) -> Result<GridFunction2D> {
    let mut s = Spectrum2D::zeros(n)?;
    for a in -2i64..=2 {
        for b in -2i64..=2 {
            s.set(
                a,
                b,
                rng::complex_normal(rng) / (1.0 + (a * a + b * b) as f64),
            );
        }
    }
    Ok(s.inverse())
}

fn telescope(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.telescope;
    let n = cfg.grid_n();
    let geo = DyadicGeometry::default();
    let mut table = Table::new(
        "telescope",
        &[
            "tree",
            "rects",
            "relative",
            "residual",
            "residual_2x",
            "residual_4x",
        ],
    );
    let (mut worst, mut monotone, mut rows) = (0.0f64, true, Vec::new());
    for trial in 0..cfg.trials_or(10) {
        let mut r = rng::stream(cfg.seed, &[TREE_TAG, trial as u64]);
        let tree = random_convex_tree(geo, 0, p.max_depth, p.p_child, &mut r)?;
        let fs = [
            smooth_input(n, &mut r)?,
            smooth_input(n, &mut r)?,
            smooth_input(n, &mut r)?,
            smooth_input(n, &mut r)?,
        ];
        let refs = [&fs[0], &fs[1], &fs[2], &fs[3]];
        let reps: Vec<_> = [1, 2, 4]
            .iter()
            .map(|&k| telescoping_residual(&tree, refs, &p.form, &p.quad.refined(k)))
            .collect::<Result<_>>()?;
        let res: Vec<f64> = reps.iter().map(|r| r.residual).collect();
        worst = worst.max(reps[0].relative);
        monotone &= res[1] < res[0] && res[2] < res[1];
        table.push(vec![
            trial.to_string(),
            tree.rects.len().to_string(),
            fmt(reps[0].relative),
            fmt(res[0]),
            fmt(res[1]),
            fmt(res[2]),
        ]);
        rows.push(json!({"tree": serde_json::from_str::<serde_json::Value>(&tree.to_json_string()?)?, "report": reps[0], "refined_residuals": res}));
    }
    let checks = vec![
        Check::at_most("max_relative_residual", worst, p.tolerance),
        Check::holds("monotone_under_refinement", monotone),
    ];
    Ok((json!({"n": n, "trees": rows}), checks, vec![table]))
}

fn sublevel(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.sublevel;
    let n = cfg.grid_n();
    let mut table = Table::new("sublevel", &["pair", "eps", "measure"]);
    let (mut min_slope, mut monotone, mut reports) = (f64::INFINITY, true, Vec::new());
    for trial in 0..cfg.trials_or(20) {
        let mut r = rng::stream(cfg.seed, &[SUBLEVEL_TAG, trial as u64]);
        let (a, b) = adversarial_pair(n, p.max_depth, &mut r)?;
        let rep = sublevel_fit(&a, &b, &p.region, &p.epsilons, &p.grid)?;
        min_slope = min_slope.min(rep.fitted_sigma.unwrap_or(f64::NEG_INFINITY));
        monotone &= rep.monotone;
        for (e, m) in rep.epsilons.iter().zip(&rep.measures) {
            table.push(vec![trial.to_string(), fmt(*e), fmt(*m)]);
        }
        reports.push(rep);
    }
    let zero = GridFunction2D::zeros(n)?;
    let ctrl = sublevel_fit(&zero, &zero, &p.region, &p.epsilons, &p.grid)?;
    let vol = p.region.volume();
    let ctrl_dev = ctrl
        .measures
        .iter()
        .map(|m| (m - vol).abs())
        .fold(0.0, f64::max);
    let checks = vec![
        Check::at_least("min_fitted_slope", min_slope, p.min_slope),
        Check::holds("measures_monotone", monotone),
        Check::at_most("control_measure_deviation", ctrl_dev, 0.0),
    ];
    Ok((
        json!({"n": n, "pairs": reports, "control": ctrl, "volume": vol}),
        checks,
        vec![table],
    ))
}

fn read_bitmap(path: &Path) -> Result<BitmapSet> {
    if path.extension().is_some_and(|e| e == "json") {
        BitmapSet::from_json_str(&std::fs::read_to_string(path)?)
    } else {
        BitmapSet::read_pbm(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn input_set(cfg: &RunConfig) -> Result<BitmapSet> {
    match &cfg.bitmap {
        Some(p) => read_bitmap(p),
        None => {
            let mut r = rng::stream(cfg.seed, &[BITMAP_TAG]);
            BitmapSet::random(cfg.grid_n(), cfg.pattern.density, &mut r)
        }
    }
}

fn patterns(cfg: &RunConfig) -> Result<Outcome> {
    let e = input_set(cfg)?;
    let n = e.n;
    let t_min = cfg.pattern.t_min.unwrap_or(1.0 / n as f64);
    let found = pattern_search(&e, t_min)?;
    // Cross-check against a fresh read of the input and the count profile.
    let again = match &cfg.bitmap {
        Some(p) => read_bitmap(p)?,
        None => e.clone(),
    };
    let m_min = (t_min * n as f64 - 1e-9).ceil().max(1.0) as usize;
    let tail: f64 = count_profile(&e.indicator(), n)?
        .iter()
        .skip(m_min)
        .map(|(_, v)| v.re)
        .sum();
    let mut checks = vec![Check::holds(
        "count_profile_agrees",
        (tail > 0.0) == found.is_some(),
    )];
    if let Some(tr) = &found {
        checks.push(Check::holds("triple_verified", tr.verify(&again)));
    }
    let result = json!({
        "n": n,
        "density": e.density(),
        "t_min": t_min,
        "triple": found.map_or(json!("none"), |t| json!({"x": t.x, "y": t.y, "t": t.t, "cells": t.cells(n)})),
        "count_tail": tail / n as f64,
    });
    Ok((result, checks, vec![]))
}

fn dichotomy(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.dichotomy;
    let f = input_set(cfg)?.indicator();
    let run = dichotomy_run(&f, p.k0, p.m_factor, p.max_iter, &p.thresholds)?;
    let mut buf = Vec::new();
    write_dichotomy_csv(&run, &mut buf)?;
    let mut rdr = csv::Reader::from_reader(&buf[..]);
    let header: Vec<&str> = vec!["l", "k_l", "count", "increment", "branch"];
    let mut table = Table::new("dichotomy", &header);
    for rec in rdr.records() {
        table.push(rec?.iter().map(String::from).collect());
    }
    let consistent = run.records.iter().all(|r| {
        let want = if r.count > r.count_threshold {
            Branch::CountLarge
        } else if r.increment > r.increment_threshold {
            Branch::IncrementLarge
        } else {
            Branch::Neither
        };
        r.branch == want
    });
    let checks = vec![
        Check::at_most(
            "energy_sum_over_budget",
            run.energy_sum / (4.0 * run.energy_constant * run.norm_sq).max(f64::MIN_POSITIVE),
            1.0,
        ),
        Check::holds("branches_match_thresholds", consistent),
    ];
    Ok((json!({"n": f.n, "run": run}), checks, vec![table]))
}

/// Inputs for the lower-bound sweep: uniform values, set indicators and
/// cubed uniforms in turn.
fn unit_input(n: usize, kind: usize, rng: &mut LabRng) -> Result<GridFunction2D> {
    match kind % 3 {
        0 => GridFunction2D::from_real_fn(n, |_, _| rng::uniform(rng, 0.0, 1.0)),
        1 => {
            let d = rng::uniform(rng, 0.0, 1.0);
            Ok(BitmapSet::random(n, d, rng)?.indicator())
        }
        _ => GridFunction2D::from_real_fn(n, |_, _| rng::uniform(rng, 0.0, 1.0).powi(3)),
    }
}

fn lower_bound_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let trials = cfg.trials_or(1000);
    let mut table = Table::new(
        "lower_bound",
        &["n", "trials", "checks", "violations", "min_margin"],
    );
    let (mut violations, mut per_n) = (0usize, Vec::new());
    for &n in &cfg.sweep.ns {
        let levels = n.trailing_zeros();
        let (mut count, mut bad, mut margin) = (0usize, 0usize, f64::INFINITY);
        for trial in 0..trials {
            let mut r = rng::stream(cfg.seed, &[SWEEP_TAG, n as u64, trial as u64]);
            let f = unit_input(n, trial, &mut r)?;
            for k in 0..=levels {
                for l in 0..=levels {
                    let lb = lower_bound_check(&f, k, l)?;
                    count += 1;
                    bad += usize::from(!lb.ok);
                    margin = margin.min(lb.lhs - lb.rhs);
                }
            }
        }
        violations += bad;
        table.push(vec![
            n.to_string(),
            trials.to_string(),
            count.to_string(),
            bad.to_string(),
            fmt(margin),
        ]);
        per_n.push(json!({"n": n, "checks": count, "violations": bad, "min_margin": margin}));
    }
    let checks = vec![Check::at_most("violations", violations as f64, 0.0)];
    Ok((
        json!({"trials_per_n": trials, "violations": violations, "sizes": per_n}),
        checks,
        vec![table],
    ))
}

fn identity_suite(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.grid_n();
    let mut checks = Vec::new();
    let (mut parseval, mut round_trip, mut lp, mut autocorr, mut split, mut mart) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut window_excess = 0.0f64;
    for trial in 0..cfg.trials_or(3) {
        let mut r = rng::stream(cfg.seed, &[IDENTITY_TAG, trial as u64]);
        let f = GridFunction2D::from_fn(n, |_, _| rng::complex_normal(&mut r))?;
        let s = f.forward();
        let e = f.norm_lp(2.0).powi(2);
        parseval = parseval.max((s.energy() - e).abs() / e);
        round_trip = round_trip.max(s.inverse().max_abs_diff(&f) / f.norm_lp(f64::INFINITY));
        for axis in [Axis::X, Axis::Y] {
            lp = lp.max(lp_telescoping(&f, axis, 1, j_max(n))? / f.norm_lp(f64::INFINITY));
        }
        let g = f.fiber_x(0);
        for radius in [1.0, 3.0, (n / 4) as f64] {
            let a = autocorr_energy(&g, radius)?;
            let b = autocorr_energy_shifts(&g, radius)?;
            autocorr = autocorr.max((a - b).abs() / a);
        }
        for (radius, rho) in [(2.0, 0.1), ((n / 8) as f64, 0.25)] {
            let sf = sharp_flat_split(&g, &SharpFlatParams { r: radius, rho })?;
            let back = sf
                .sharp
                .values
                .iter()
                .zip(&sf.flat.values)
                .zip(&g.values)
                .map(|((a, b), c)| (a + b - c).norm())
                .fold(0.0, f64::max);
            split = split.max(back / g.norm_lp(f64::INFINITY));
            window_excess = window_excess.max(sf.selected.len() as f64 - 4.0 / rho);
        }
        let u = f.map(|z| Complex64::new(z.re.abs().min(1.0), 0.0));
        for axis in [Axis::X, Axis::Y] {
            for k in 0..=n.trailing_zeros() {
                let m = martingale_avg(&u, axis, k)?;
                let mm = martingale_avg(&m, axis, k)?;
                mart = mart
                    .max(m.max_abs_diff(&mm))
                    .max((m.mean() - u.mean()).norm());
            }
        }
    }
    checks.push(Check::at_most("parseval", parseval, 1e-12));
    checks.push(Check::at_most("round_trip", round_trip, 1e-12));
    checks.push(Check::at_most("lp_telescoping", lp, 1e-12));
    checks.push(Check::at_most("autocorrelation_identity", autocorr, 1e-10));
    checks.push(Check::at_most("sharp_flat_reconstruction", split, 1e-12));
    checks.push(Check::at_most(
        "sharp_windows_minus_4_over_rho",
        window_excess,
        0.0,
    ));
    checks.push(Check::at_most(
        "martingale_idempotence_and_mass",
        mart,
        1e-12,
    ));
    let mut table = Table::new("identities", &["name", "value", "rule", "pass"]);
    for c in &checks {
        table.push(vec![
            c.name.clone(),
            fmt(c.value),
            c.rule.clone(),
            c.pass.to_string(),
        ]);
    }
    let result = json!({"n": n, "residuals": checks.iter().map(|c| (c.name.clone(), c.value)).collect::<std::collections::BTreeMap<_, _>>()});
    Ok((result, checks, vec![table]))
}
