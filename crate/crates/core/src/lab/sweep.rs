//! Parameter sweeps over the strip half-width.

use super::pass::{mountain_pass, PassInit, PassSpec};
use crate::energy::energy;
use crate::error::{GlError, Result};
use crate::field::SymmetryClass;
use crate::grid::{default_length, Grid, StripGrid};
use crate::minimize::{discrete_soliton, minimize, Init, MinimizeConfig};
use crate::spectral::{pencil_eigs, stability_first_direction, PencilVariant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "GL_LAB_WORKERS";

/// Energy gap above which the vortex minimizer counts as departed from the soliton.
pub const DEPARTURE_GAP: f64 = 1e-6;

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` inside a pool of [`workers`] threads.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .map_err(|e| GlError::InvalidArgument(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Minimize,
    Stability,
    Spectrum,
    MountainPass,
}

impl Task {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "minimize" => Ok(Task::Minimize),
            "stability" => Ok(Task::Stability),
            "spectrum" => Ok(Task::Spectrum),
            "mountain-pass" => Ok(Task::MountainPass),
            t => Err(GlError::InvalidArgument(format!("unknown sweep task '{t}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Positive and ascending.
    pub d_values: Vec<f64>,
    pub tasks: Vec<Task>,
    /// Grid nodes per unit length, the same for every `d`.
    pub nodes_per_unit: f64,
    /// Truncation half-length; [`default_length`] when `None`.
    pub length: Option<f64>,
    /// Refine the stability crossing by bisection.
    pub bisect: bool,
    pub tol: f64,
}

impl SweepSpec {
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0 && hi >= lo) {
            return Err(GlError::InvalidArgument("sweep range needs step > 0 and max >= min".into()));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).collect())
    }

    fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() || self.d_values.iter().any(|&d| !(d > 0.0)) {
            return Err(GlError::InvalidArgument("sweep values of d must be positive".into()));
        }
        if self.d_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(GlError::InvalidArgument("sweep values of d must be ascending".into()));
        }
        if self.nodes_per_unit < 8.0 {
            return Err(GlError::InvalidArgument("nodes_per_unit must be at least 8".into()));
        }
        Ok(())
    }

    /// Strip grid for half-width `d` at the fixed node density.
    pub fn grid(&self, d: f64) -> Result<StripGrid> {
        let l = self.length.unwrap_or_else(|| default_length(d));
        let odd = |len: f64| 2 * ((len * self.nodes_per_unit / 2.0).round() as usize).max(2) + 1;
        StripGrid::new(d, l, odd(2.0 * l), odd(2.0 * d))
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            d_values: vec![],
            tasks: vec![Task::Minimize, Task::Stability],
            nodes_per_unit: 8.0,
            length: None,
            bisect: true,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: f64,
    pub energy_soliton: f64,
    pub energy_vortex: Option<f64>,
    /// Smallest first-direction stability eigenvalue at the soliton, odd-in-`y` class.
    pub lambda_min: Option<f64>,
    pub barrier: Option<f64>,
    /// Lowest four eigenvalues of the weighted pencil of the vortex minimizer.
    pub spectrum: Option<Vec<f64>>,
    /// Whether the vortex minimizer has departed from the soliton.
    pub departed: Option<bool>,
    /// Set on the first row past the stability crossing.
    pub dc_flag: bool,
    /// Whether this row comes from the bisection refinement.
    pub refinement: bool,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogFit {
    /// Mean of `energy_vortex - pi ln d` over rows with `d` in `[4, 12]`.
    pub constant: f64,
    /// Largest deviation from `constant` over the same rows.
    pub spread: f64,
    pub rows: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub workers: usize,
    /// Coarse rows in order of `d`, followed by refinement rows.
    pub rows: Vec<SweepRow>,
    /// Stability crossing, linearly interpolated in the final bracket.
    pub d_c: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    /// First coarse `d` at which the vortex minimizer departs from the soliton.
    pub departure_d: Option<f64>,
    pub log_fit: Option<LogFit>,
}

fn point(spec: &SweepSpec, d: f64, tasks: &[Task]) -> SweepRow {
    let mut row = SweepRow { d, energy_soliton: f64::NAN, ..SweepRow::default() };
    if let Err(e) = fill_point(spec, d, tasks, &mut row) {
        row.errors.push(e.to_string());
    }
    row
}

fn fill_point(spec: &SweepSpec, d: f64, tasks: &[Task], row: &mut SweepRow) -> Result<()> {
    let sg = spec.grid(d)?;
    let grid = Grid::Strip(sg);
    let us = discrete_soliton(grid, spec.tol)?.field;
    row.energy_soliton = energy(&us).total;
    if tasks.contains(&Task::Stability) {
        match stability_first_direction(&us, SymmetryClass::Imparity) {
            Ok(r) => row.lambda_min = r.eigenvalues.first().copied(),
            Err(e) => row.errors.push(format!("stability: {e}")),
        }
    }
    let needs_vortex = tasks.iter().any(|t| matches!(t, Task::Minimize | Task::Spectrum));
    let vortex = if needs_vortex {
        let cfg = MinimizeConfig { tol_residual: spec.tol, init: Init::VortexSeed(1), ..MinimizeConfig::default() };
        match minimize(&cfg, grid) {
            Ok(m) => {
                let e = m.report.energy.total;
                row.energy_vortex = Some(e);
                row.departed = Some(row.energy_soliton - e > DEPARTURE_GAP);
                Some(m.field)
            }
            Err(e) => {
                row.errors.push(format!("minimize: {e}"));
                None
            }
        }
    } else {
        None
    };
    if let (true, Some(v)) = (tasks.contains(&Task::Spectrum), &vortex) {
        match pencil_eigs(v, PencilVariant::Mu, 4) {
            Ok(r) => row.spectrum = Some(r.eigenvalues),
            Err(e) => row.errors.push(format!("spectrum: {e}")),
        }
    }
    if tasks.contains(&Task::MountainPass) {
        let pass =
            PassSpec { d, nx: sg.nx, ny: sg.ny, length: Some(sg.l), init: PassInit::Explicit, ..PassSpec::default() };
        match mountain_pass(&pass) {
            Ok(r) => row.barrier = Some(r.report.barrier),
            Err(e) => row.errors.push(format!("mountain-pass: {e}")),
        }
    }
    Ok(())
}

/// Runs every point of `spec` in the worker pool, then refines the stability
/// crossing with three bisection solves.
pub fn sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let mut rows: Vec<SweepRow> =
        with_workers(|| spec.d_values.par_iter().map(|&d| point(spec, d, &spec.tasks)).collect())?;
    let mut bracket = None;
    for k in 1..rows.len() {
        if let (Some(a), Some(b)) = (rows[k - 1].lambda_min, rows[k].lambda_min) {
            if a > 0.0 && b <= 0.0 {
                rows[k].dc_flag = true;
                bracket = Some(([rows[k - 1].d, a], [rows[k].d, b]));
                break;
            }
        }
    }
    let mut d_c = None;
    let mut final_bracket = None;
    if let Some((mut lo, mut hi)) = bracket {
        if spec.bisect {
            for _ in 0..3 {
                let mid = (0.5 * (lo[0] + hi[0]) * 1e12).round() / 1e12;
                let mut r = point(spec, mid, &[Task::Stability]);
                r.refinement = true;
                let lam = r.lambda_min;
                rows.push(r);
                match lam {
                    Some(l) if l > 0.0 => lo = [mid, l],
                    Some(l) => hi = [mid, l],
                    None => break,
                }
            }
        }
        d_c = Some(lo[0] + lo[1] * (hi[0] - lo[0]) / (lo[1] - hi[1]));
        final_bracket = Some([lo[0], hi[0]]);
    }
    let departure_d = rows.iter().filter(|r| !r.refinement).find(|r| r.departed == Some(true)).map(|r| r.d);
    let window: Vec<f64> = rows
        .iter()
        .filter(|r| !r.refinement && (4.0..=12.0).contains(&r.d))
        .filter_map(|r| r.energy_vortex.map(|e| e - PI * r.d.ln()))
        .collect();
    let log_fit = (!window.is_empty()).then(|| {
        let constant = window.iter().sum::<f64>() / window.len() as f64;
        let spread = window.iter().fold(0.0f64, |m, v| m.max((v - constant).abs()));
        LogFit { constant, spread, rows: window.len() }
    });
    Ok(SweepReport { spec: spec.clone(), workers: workers(), rows, d_c, bracket: final_bracket, departure_d, log_fit })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.10e}"))
}

/// Bifurcation table `d,energy_soliton,energy_vortex,lambda_min,barrier,dc_flag`, sorted by `d`.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut rows: Vec<&SweepRow> = report.rows.iter().collect();
    rows.sort_by(|a, b| a.d.total_cmp(&b.d));
    let mut s = String::from("d,energy_soliton,energy_vortex,lambda_min,barrier,dc_flag\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:.10e},{},{},{},{}\n",
            r.d,
            r.energy_soliton,
            opt(r.energy_vortex),
            opt(r.lambda_min),
            opt(r.barrier),
            r.dc_flag as u8
        ));
    }
    s
}
