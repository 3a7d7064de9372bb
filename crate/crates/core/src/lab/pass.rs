//! Mountain-pass driver: endpoints, initial path, string method, climbing image.

use crate::energy::energy;
use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::{default_length, AxiGrid, Grid, StripGrid};
use crate::minimize::{discrete_soliton, minimize, MinimizeConfig, RingSetup};
use crate::mountain::{
    barrier_bounds, climbing_image, explicit_path, linear_path, mean_zero_crossing, select_n, string_method,
    BarrierBounds, ClimbOptions, Dimension, ExplicitOptions, PathState, Regime, SaddleReport, StringOptions,
    StringReport, ZeroCrossing, DEFAULT_IMAGES,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PassInit {
    /// The explicit soliton path on strips; a circle around the soliton on cylinders.
    Explicit,
    /// Straight line between the endpoints.
    Linear,
    /// Images read from a concatenated field file.
    File(PathBuf),
}

impl PassInit {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(PassInit::Explicit),
            "linear" => Ok(PassInit::Linear),
            _ if s.starts_with("file:") => Ok(PassInit::File(PathBuf::from(&s[5..]))),
            _ => Err(GlError::InvalidArgument(format!("unknown path init '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PassSpec {
    pub d: f64,
    pub dim: Dimension,
    /// Strip truncation, or the half-length `R` of the finite cylinder.
    pub length: Option<f64>,
    pub nx: usize,
    /// `ny` on strips, `nr` on cylinders.
    pub ny: usize,
    pub images: usize,
    pub init: PassInit,
    pub iters: usize,
    /// Skip the climbing-image refinement.
    pub no_saddle: bool,
}

impl Default for PassSpec {
    fn default() -> Self {
        Self {
            d: 3.0,
            dim: Dimension::Two,
            length: None,
            nx: 241,
            ny: 25,
            images: DEFAULT_IMAGES,
            init: PassInit::Explicit,
            iters: 2000,
            no_saddle: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PassReport {
    pub d: f64,
    pub dim: Dimension,
    pub grid: Grid,
    pub barrier: f64,
    pub barrier_index: usize,
    pub bounds: BarrierBounds,
    /// Energy of the soliton on the same grid.
    pub soliton_energy: f64,
    /// Energy of the vortex minimizer, strips above the threshold only.
    pub vortex_energy: Option<f64>,
    pub saddle_energy: Option<f64>,
    pub saddle_residual: Option<f64>,
    pub negative_directions: Option<usize>,
    pub saddle: Option<SaddleReport>,
    pub saddle_error: Option<String>,
    pub string: StringReport,
    pub mean_zero: Option<ZeroCrossing>,
}

pub struct PassResult {
    pub path: PathState,
    pub saddle: Option<Field2>,
    pub report: PassReport,
}

fn read_path(path: &PathBuf, grid: Grid) -> Result<PathState> {
    let images = crate::io::read_fields(path)?;
    if images.iter().any(|f| *f.grid() != grid) {
        return Err(GlError::DimensionMismatch("path file grid differs from the requested grid".into()));
    }
    PathState::new(images)
}

/// Runs the full mountain-pass pipeline for `spec`.
pub fn mountain_pass(spec: &PassSpec) -> Result<PassResult> {
    if spec.images < 3 {
        return Err(GlError::InvalidArgument("a path needs at least 3 images".into()));
    }
    let (grid, symmetry, start, soliton_energy, vortex_energy, mirror, monotone) = match spec.dim {
        Dimension::Two => {
            let l = spec.length.unwrap_or_else(|| default_length(spec.d));
            let grid = Grid::Strip(StripGrid::new(spec.d, l, spec.nx, spec.ny)?);
            let us = discrete_soliton(grid, 1e-9)?.field;
            let e_s = energy(&us).total;
            let e_d = if spec.d > crate::STRIP_THRESHOLD {
                Some(
                    minimize(&MinimizeConfig { tol_residual: 1e-9, ..MinimizeConfig::default() }, grid)?
                        .report
                        .energy
                        .total,
                )
            } else {
                None
            };
            let reference = e_d.map_or(e_s, |e| e.min(e_s));
            let start = match &spec.init {
                PassInit::Explicit => {
                    let opts = ExplicitOptions { endpoint_reference: Some(reference), ..ExplicitOptions::default() };
                    explicit_path(Regime::Soliton, &us, &opts)?.path.reparametrized(spec.images)?
                }
                PassInit::Linear => {
                    let c = select_n(&grid, reference)?;
                    linear_path(&c.minus, &c.plus, spec.images)?
                }
                PassInit::File(p) => read_path(p, grid)?,
            };
            (grid, SymmetryClass::PhaseImprintOnly, start, e_s, e_d, true, true)
        }
        Dimension::ThreeRadial => {
            let r = spec.length.ok_or_else(|| {
                GlError::InvalidArgument("the radial mountain pass needs the cylinder half-length R".into())
            })?;
            let ag = AxiGrid::new(spec.d, r, spec.nx, spec.ny)?;
            let grid = Grid::Axi(ag);
            let setup = RingSetup::new(ag)?;
            let start = match &spec.init {
                PassInit::Explicit => setup.circle_path(0.3, spec.images)?,
                PassInit::Linear => linear_path(&setup.minus, &setup.plus, spec.images)?,
                PassInit::File(p) => read_path(p, grid)?,
            };
            (grid, SymmetryClass::Radial3D, start, energy(&setup.soliton).total, None, false, false)
        }
    };
    let opts = StringOptions { iters: spec.iters, mirror, monotone, ..StringOptions::default() };
    let (path, string) = string_method(start, symmetry, &opts)?;
    let (saddle, saddle_report, saddle_error) = if spec.no_saddle {
        (None, None, None)
    } else {
        match climbing_image(&path, symmetry, &ClimbOptions::default()) {
            Ok((f, r)) => (Some(f), Some(r), None),
            Err(e) => (None, None, Some(e.to_string())),
        }
    };
    let report = PassReport {
        d: spec.d,
        dim: spec.dim,
        grid,
        barrier: path.barrier,
        barrier_index: path.barrier_index,
        bounds: barrier_bounds(spec.d, spec.dim, vortex_energy),
        soliton_energy,
        vortex_energy,
        saddle_energy: saddle_report.as_ref().map(|s| s.energy),
        saddle_residual: saddle_report.as_ref().map(|s| s.residual),
        negative_directions: saddle_report.as_ref().map(|s| s.negative_directions),
        saddle: saddle_report,
        saddle_error,
        string,
        mean_zero: mean_zero_crossing(&path).ok(),
    };
    Ok(PassResult { path, saddle, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_init() {
        assert_eq!(PassInit::parse("linear").unwrap(), PassInit::Linear);
        assert_eq!(PassInit::parse("file:a.glfs").unwrap(), PassInit::File("a.glfs".into()));
        assert!(PassInit::parse("circle").is_err());
    }

    #[test]
    fn radial_pass_requires_length() {
        let spec = PassSpec { dim: Dimension::ThreeRadial, ..PassSpec::default() };
        assert!(mountain_pass(&spec).is_err());
    }

    #[test]
    fn soliton_regime_pass() {
        let spec =
            PassSpec { d: 1.5, length: Some(12.0), nx: 97, ny: 9, images: 13, iters: 200, ..PassSpec::default() };
        let r = mountain_pass(&spec).unwrap();
        let rep = &r.report;
        assert!((rep.barrier / rep.soliton_energy - 1.0).abs() < 0.02);
        assert_eq!(rep.negative_directions, Some(1));
        assert!(rep.barrier >= rep.bounds.lower.unwrap());
        assert!(rep.mean_zero.as_ref().unwrap().ok);
    }
}
