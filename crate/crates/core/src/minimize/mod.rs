//! Symmetry-constrained energy minimization on strips, sectors and
//! axisymmetric cylinders.

pub mod cylinder;
pub mod flow;
pub mod ring;

pub use cylinder::{finite_cylinder_profiles, CylinderProfile};
pub use flow::{Flow, FlowOptions, FlowReport, StepRule};
pub use ring::{ring_candidate, RingOptions, RingReport, RingSetup};

use crate::diagnostics::{diagnose, Diagnostics, SignPattern};
use crate::energy::{energy, EnergyBreakdown};
use crate::error::{GlError, Result};
use crate::field::{project_symmetry, substrip_fold, symmetry_residual, Field2, SymmetryClass};
use crate::grid::{Grid, SectorGrid3, StripGrid};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Init {
    Soliton,
    /// Degree `sign` vortex at the origin (a vortex line on sector grids).
    VortexSeed(i8),
    /// One vortex per substrip, alternating orientation.
    DipoleSeed(u32),
    /// Vortex ring of radius `d/2` in the plane `x = 0` (axisymmetric grids).
    RingSeed,
    FromFile(PathBuf),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub symmetry: SymmetryClass,
    pub init: Init,
    pub tol_residual: f64,
    pub max_iter: usize,
    pub step_rule: StepRule,
    pub clamp_modulus: bool,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            symmetry: SymmetryClass::Imparity,
            init: Init::VortexSeed(1),
            tol_residual: 1e-8,
            max_iter: 20_000,
            step_rule: StepRule::BarzilaiBorwein,
            clamp_modulus: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub energy: EnergyBreakdown,
    pub symmetry_residual: f64,
    /// `+1` or `-1` from the sign of `-u1` near `(0, d/2)`; `None` when `u1` vanishes there.
    pub branch: Option<i8>,
    pub energy_history: Vec<f64>,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub field: Field2,
    pub report: MinimizeReport,
}

fn tanh_profile(x: f64) -> f64 {
    (x / SQRT_2).tanh()
}

/// Builds the initial field for `init` on `grid`.
pub fn seed(grid: Grid, init: &Init, symmetry: SymmetryClass) -> Result<Field2> {
    let h = grid.hx();
    let vortex = |x: f64, y: f64, sign: f64| -> [f64; 2] {
        let rho = x.hypot(y);
        let g = (rho / SQRT_2).tanh() / rho.max(h);
        let u = [-sign * y * g, tanh_profile(x)];
        let m = u[0].hypot(u[1]);
        if m > 1.0 {
            [u[0] / m, u[1] / m]
        } else {
            u
        }
    };
    let f = match init {
        Init::Soliton => Field2::from_fn(grid, |p| [0.0, tanh_profile(p[0])]),
        Init::FromFile(path) => {
            let f = crate::io::read_field(path)?;
            if *f.grid() != grid {
                return Err(GlError::DimensionMismatch("seed file grid differs from the requested grid".into()));
            }
            Field2::new(grid, f.into_values(), None)?
        }
        Init::VortexSeed(sign) => {
            let s = *sign as f64;
            match grid {
                Grid::Sector(g) => {
                    let ell = g.ell as f64;
                    Field2::from_fn(grid, |p| {
                        let rho = p[1].hypot(p[2]);
                        let th = p[2].atan2(p[1]);
                        let u1 = -s * (ell * th).cos() * (rho / SQRT_2).tanh() / (p[0] / SQRT_2).cosh();
                        [u1, tanh_profile(p[0])]
                    })
                }
                _ => Field2::from_fn(grid, |p| vortex(p[0], p[1], s)),
            }
        }
        Init::DipoleSeed(k) => {
            let g = match grid {
                Grid::Strip(g) => g,
                _ => return Err(GlError::DimensionMismatch("dipole seed needs a strip grid".into())),
            };
            let fold = substrip_fold(g.ny, *k)?;
            let centre = -g.d + g.d / *k as f64;
            let values = (0..grid.len())
                .map(|n| {
                    let (i, j, _) = grid.split(n);
                    let (r, sgn) = fold[j];
                    let v = vortex(g.x(i), g.y(r) - centre, 1.0);
                    [sgn * v[0], v[1]]
                })
                .collect();
            Field2::new(grid, values, None)?
        }
        Init::RingSeed => {
            let g = match grid {
                Grid::Axi(g) => g,
                _ => return Err(GlError::DimensionMismatch("ring seed needs an axisymmetric grid".into())),
            };
            let r0 = 0.5 * g.d;
            Field2::from_fn(grid, |p| vortex(p[0], p[1] - r0, 1.0))
        }
    };
    project_symmetry(&f, symmetry)
}

/// Branch label from the sign of `u1` at the node nearest `(0, d/2)`.
pub fn branch_label(f: &Field2) -> Option<i8> {
    let grid = f.grid();
    let n = match grid {
        Grid::Strip(g) => {
            let j = ((0.5 * g.d + g.d) / g.hy).round() as usize;
            grid.index((g.nx - 1) / 2, j.min(g.ny - 1), 0)
        }
        Grid::Axi(g) => grid.index((g.nx - 1) / 2, ((0.5 * g.d) / g.hr).round() as usize, 0),
        Grid::Sector(g) => grid.index((g.nx - 1) / 2, ((0.5 * g.d) / g.hrho).floor() as usize, 0),
    };
    let u1 = f.values()[n][0];
    let tiny = 1e-8 * f.sup_norm();
    if u1 < -tiny {
        Some(1)
    } else if u1 > tiny {
        Some(-1)
    } else {
        None
    }
}

/// Minimizes the energy in `cfg.symmetry` starting from `cfg.init`.
///
/// A run that reaches `max_iter` returns the last iterate with `converged = false`.
pub fn minimize(cfg: &MinimizeConfig, grid: Grid) -> Result<Minimized> {
    if !(cfg.tol_residual > 0.0) {
        return Err(GlError::InvalidArgument("tol_residual must be positive".into()));
    }
    let start = seed(grid, &cfg.init, cfg.symmetry)?;
    minimize_from(cfg, start)
}

/// Minimizes starting from an explicit field.
pub fn minimize_from(cfg: &MinimizeConfig, start: Field2) -> Result<Minimized> {
    let grid = *start.grid();
    let flow = Flow::new(grid, Some(cfg.symmetry))?;
    let opts = FlowOptions {
        tol: cfg.tol_residual,
        max_iter: cfg.max_iter,
        step_rule: cfg.step_rule,
        clamp_modulus: cfg.clamp_modulus,
        ..FlowOptions::default()
    };
    let mut u = start.into_values();
    let rep = flow.run(&mut u, &opts)?;
    let field = Field2::new(grid, u, Some(cfg.symmetry))?;
    let pattern = match (grid, cfg.symmetry.canonical()) {
        (Grid::Strip(_), SymmetryClass::Imparity) => Some(SignPattern::UVSign),
        (Grid::Axi(_), _) => Some(SignPattern::HatUVSign),
        _ => None,
    };
    let diagnostics = diagnose(&field, pattern).ok();
    let report = MinimizeReport {
        iterations: rep.iterations,
        converged: rep.converged,
        residual: rep.residual,
        energy: energy(&field),
        symmetry_residual: symmetry_residual(&field, cfg.symmetry)?,
        branch: branch_label(&field),
        energy_history: rep.history,
        diagnostics,
    };
    Ok(Minimized { field, report })
}

/// Substrip minimizer together with the checks of the tiling identity.
#[derive(Clone, Debug)]
pub struct SubstripResult {
    pub field: Field2,
    pub report: MinimizeReport,
    /// Minimizer on the strip of half-width `d/k`, computed independently.
    pub flat: Field2,
    /// Largest nodewise gap between the first substrip of `field` and `flat`, after branch alignment.
    pub tiling_gap: f64,
    /// `k` times the energy of the first substrip.
    pub tiled_energy: f64,
}

/// Minimizer in the class `Substrip(k)`, compared with the `d/k` minimizer.
pub fn minimize_substrip(k: u32, grid: StripGrid, tol: f64) -> Result<SubstripResult> {
    if k == 0 || !(grid.ny - 1).is_multiple_of(2 * k as usize) {
        return Err(GlError::DimensionMismatch(format!("ny - 1 = {} not divisible by 2k = {}", grid.ny - 1, 2 * k)));
    }
    let cfg = MinimizeConfig {
        symmetry: SymmetryClass::Substrip(k),
        init: Init::DipoleSeed(k),
        tol_residual: tol,
        ..MinimizeConfig::default()
    };
    let full = minimize(&cfg, Grid::Strip(grid))?;
    let sub_ny = (grid.ny - 1) / k as usize + 1;
    let sub = StripGrid::new(grid.d / k as f64, grid.l, grid.nx, sub_ny)?;
    let flat_cfg = MinimizeConfig {
        symmetry: SymmetryClass::Imparity,
        init: Init::VortexSeed(1),
        tol_residual: tol,
        ..MinimizeConfig::default()
    };
    let flat = minimize(&flat_cfg, Grid::Strip(sub))?.field;
    let piece: Vec<[f64; 2]> = (0..sub_ny)
        .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
        .map(|(i, j)| full.field.values()[i + grid.nx * j])
        .collect();
    let piece = Field2::new(Grid::Strip(sub), piece, None)?;
    let gap_plus = piece.sup_distance(&flat);
    let gap_minus = piece.sup_distance(&flat.conjugate_branch());
    let tiled_energy = k as f64 * energy(&piece).total;
    Ok(SubstripResult {
        field: full.field,
        report: full.report,
        flat,
        tiling_gap: gap_plus.min(gap_minus),
        tiled_energy,
    })
}

#[derive(Clone, Debug)]
pub struct SectorResult {
    pub field: Field2,
    pub report: MinimizeReport,
    /// Whether `sup |u1| > 1e-3`.
    pub vortex_regime: bool,
}

/// Minimizer in the sector class `Sector3D(ell)`.
pub fn minimize_sector3d(grid: SectorGrid3, tol: f64, max_iter: usize) -> Result<SectorResult> {
    let cfg = MinimizeConfig {
        symmetry: SymmetryClass::Sector3D(grid.ell),
        init: Init::VortexSeed(1),
        tol_residual: tol,
        max_iter,
        ..MinimizeConfig::default()
    };
    let m = minimize(&cfg, Grid::Sector(grid))?;
    let sup_u1 = m.field.values().iter().fold(0.0f64, |a, v| a.max(v[0].abs()));
    Ok(SectorResult { vortex_regime: sup_u1 > 1e-3, field: m.field, report: m.report })
}

/// The discrete soliton: minimizer from the soliton seed in the imprinting class.
pub fn discrete_soliton(grid: Grid, tol: f64) -> Result<Minimized> {
    let cfg = MinimizeConfig {
        symmetry: SymmetryClass::PhaseImprintOnly,
        init: Init::Soliton,
        tol_residual: tol,
        ..MinimizeConfig::default()
    };
    minimize(&cfg, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_respect_symmetry() {
        let g = Grid::Strip(StripGrid::new(3.0, 30.0, 121, 25).unwrap());
        for init in [Init::Soliton, Init::VortexSeed(1), Init::VortexSeed(-1)] {
            let f = seed(g, &init, SymmetryClass::Imparity).unwrap();
            assert!(symmetry_residual(&f, SymmetryClass::Imparity).unwrap() <= 1e-14);
            assert!(f.is_clamp_exact());
        }
        let f = seed(g, &Init::DipoleSeed(2), SymmetryClass::Substrip(2)).unwrap();
        assert!(symmetry_residual(&f, SymmetryClass::Substrip(2)).unwrap() <= 1e-14);
    }

    #[test]
    fn vortex_seed_branch_label() {
        let g = Grid::Strip(StripGrid::new(3.0, 30.0, 121, 25).unwrap());
        let f = seed(g, &Init::VortexSeed(1), SymmetryClass::Imparity).unwrap();
        assert_eq!(branch_label(&f), Some(1));
        assert_eq!(branch_label(&f.conjugate_branch()), Some(-1));
    }

    #[test]
    fn small_strip_vortex_collapses_to_soliton() {
        let g = Grid::Strip(StripGrid::new(1.5, 30.0, 241, 13).unwrap());
        let cfg = MinimizeConfig { tol_residual: 1e-9, ..MinimizeConfig::default() };
        let m = minimize(&cfg, g).unwrap();
        assert!(m.report.converged);
        let s = discrete_soliton(g, 1e-9).unwrap();
        assert!(m.field.sup_distance(&s.field) < 1e-4);
        let h = &m.report.energy_history;
        assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs()));
    }

    #[test]
    fn sector_minimizer_straddles_the_cylinder_threshold() {
        // Below sqrt 2 j'_11 the ell = 1 minimizer is the soliton; above it a vortex line wins.
        let g = SectorGrid3::new(2.0, 16.0, 1, 97, 9, 5).unwrap();
        let s = minimize_sector3d(g, 1e-6, 20_000).unwrap();
        assert!(s.report.converged && !s.vortex_regime);
        let h = &s.report.energy_history;
        assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
        let g = SectorGrid3::new(3.5, 16.0, 1, 97, 9, 5).unwrap();
        let s = minimize_sector3d(g, 1e-6, 20_000).unwrap();
        assert!(s.report.converged && s.vortex_regime);
        let us = Field2::from_fn(Grid::Sector(g), |p| [0.0, (p[0] / std::f64::consts::SQRT_2).tanh()]);
        assert!(crate::energy::energy(&s.field).total < crate::energy::energy(&us).total - 1.0);
        // The far edge stays on the class.
        assert!(crate::symmetry_residual(&s.field, SymmetryClass::Sector3D(1)).unwrap() <= 1e-12);
    }
}
