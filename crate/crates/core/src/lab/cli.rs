//! Command-line front end shared by the `gl-lab` binary and the config runner.

use super::config::run_config;
use super::decay::decay_fit;
use super::pass::{mountain_pass, PassInit, PassSpec};
use super::sweep::{sweep, sweep_csv, SweepSpec, Task};
use crate::energy::energy;
use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::{default_length, AxiGrid, Grid, SectorGrid3, StripGrid};
use crate::io::{read_field, write_csv, write_field, write_fields};
use crate::minimize::{
    discrete_soliton, finite_cylinder_profiles, minimize, minimize_sector3d, ring_candidate, Init, MinimizeConfig,
    RingOptions,
};
use crate::mountain::{barrier_bounds, Dimension};
use crate::spectral::{
    disk_neumann_eigs, lambda_d1, lambda_d1_with_weight, pencil_eigs, pencil_eigs_with_weight, soliton_weight,
    stability_eigs, DiskClass, PencilVariant,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "gl-lab", version, about = "Ginzburg-Landau strip and cylinder laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Symmetry-constrained minimization.
    Minimize(MinimizeArgs),
    /// First-direction stability eigenvalues of a field.
    Stability(StabilityArgs),
    /// Weighted Neumann pencils and disk eigenvalues.
    Spectrum(SpectrumArgs),
    /// Mountain-pass barrier and saddle.
    MountainPass(MountainPassArgs),
    /// Sweep over the strip half-width.
    Sweep(SweepArgs),
    /// Tail decay of the vortex minimizer.
    Decay(DecayArgs),
    /// Finite-cylinder profiles, ring candidate and sector minimizers.
    Cylinder3d(CylinderArgs),
    /// Runs a key=value experiment file.
    Run(RunArgs),
}

/// Strip geometry shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct StripArgs {
    #[arg(long, default_value_t = 3.0)]
    pub d: f64,
    /// Truncation half-length; max(8d, 30) when absent.
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 1025)]
    pub nx: usize,
    #[arg(long, default_value_t = 65)]
    pub ny: usize,
}

impl StripArgs {
    pub fn grid(&self) -> Result<StripGrid> {
        StripGrid::new(self.d, self.l.unwrap_or_else(|| default_length(self.d)), self.nx, self.ny)
    }
}

#[derive(Args, Debug, Clone)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub strip: StripArgs,
    /// Angular nodes of sector grids.
    #[arg(long, default_value_t = 17)]
    pub ntheta: usize,
    /// x | odd | substrip:K | sector:L3 | radial.
    #[arg(long, default_value = "odd")]
    pub space: String,
    /// soliton | vortex+ | vortex- | dipole:K | ring | file:PATH; chosen from the space when absent.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub strip: StripArgs,
    /// Field to analyse; the discrete soliton on the strip grid when absent.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// x | odd | substrip:K | sector:L3 | radial.
    #[arg(long, default_value = "odd")]
    pub space: String,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub strip: StripArgs,
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Use the weight sech^2(x / sqrt 2) on the strip grid.
    #[arg(long = "soliton-weight")]
    pub soliton_weight: bool,
    /// mu | tmu | lambda1 | disk:rad | disk:ell:N.
    #[arg(long, default_value = "mu")]
    pub variant: String,
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    /// Radial cells of the disk solver.
    #[arg(long, default_value_t = 400)]
    pub nr: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MountainPassArgs {
    #[arg(long, default_value_t = 3.0)]
    pub d: f64,
    /// 2 | 3rad.
    #[arg(long, default_value = "2")]
    pub dim: String,
    /// Strip truncation half-length.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Half-length of the finite cylinder.
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 241)]
    pub nx: usize,
    /// Transverse nodes (`nr` on cylinders).
    #[arg(long, default_value_t = 25)]
    pub ny: usize,
    #[arg(long, default_value_t = crate::mountain::DEFAULT_IMAGES)]
    pub images: usize,
    /// explicit | linear | file:PATH.
    #[arg(long, default_value = "explicit")]
    pub init: String,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long = "no-saddle")]
    pub no_saddle: bool,
    #[arg(long = "out-path")]
    pub out_path: Option<PathBuf>,
    /// Saddle field.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long = "d-min", default_value_t = 1.8)]
    pub d_min: f64,
    #[arg(long = "d-max", default_value_t = 2.6)]
    pub d_max: f64,
    #[arg(long = "d-step", default_value_t = 0.1)]
    pub d_step: f64,
    /// Comma-separated list overriding the range.
    #[arg(long = "d-values")]
    pub d_values: Option<String>,
    /// Comma-separated subset of minimize, stability, spectrum, mountain-pass.
    #[arg(long, default_value = "minimize,stability")]
    pub tasks: String,
    #[arg(long = "nodes-per-unit", default_value_t = 8.0)]
    pub nodes_per_unit: f64,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "no-bisect")]
    pub no_bisect: bool,
    /// Directory receiving sweep.csv and sweep.json.
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct DecayArgs {
    #[command(flatten)]
    pub strip: StripArgs,
    /// Vortex minimizer to analyse; computed on the strip grid when absent.
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CylinderArgs {
    /// profiles | ring | sector.
    #[arg(long, default_value = "profiles")]
    pub mode: String,
    #[arg(long, default_value_t = 6.0)]
    pub d: f64,
    #[arg(long = "R", default_value_t = 40.0)]
    pub r: f64,
    #[arg(long, default_value_t = 321)]
    pub nx: usize,
    #[arg(long, default_value_t = 25)]
    pub nr: usize,
    /// Sector index of the sector mode.
    #[arg(long, default_value_t = 1)]
    pub ell: u32,
    #[arg(long, default_value_t = 17)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
}

/// What a command produced: the grid it worked on and the files it wrote.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    pub grid: Option<Grid>,
    pub outputs: Vec<PathBuf>,
}

impl Outcome {
    fn new(grid: Grid) -> Self {
        Self { grid: Some(grid), outputs: Vec::new() }
    }

    fn json(&mut self, path: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
        if let Some(p) = path {
            write_json(p, value)?;
            self.outputs.push(p.clone());
        }
        Ok(())
    }

    fn field(&mut self, path: &Option<PathBuf>, f: &Field2) -> Result<()> {
        if let Some(p) = path {
            write_field(f, p)?;
            self.outputs.push(p.clone());
        }
        Ok(())
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Parses `x | odd | substrip:K | sector:L3 | radial`.
pub fn parse_space(s: &str) -> Result<SymmetryClass> {
    match s.trim() {
        "x" => Ok(SymmetryClass::PhaseImprintOnly),
        t => SymmetryClass::parse(t),
    }
}

/// Parses `soliton | vortex+ | vortex- | dipole:K | ring | file:PATH`.
pub fn parse_init(s: &str) -> Result<Init> {
    match s.trim() {
        "soliton" => Ok(Init::Soliton),
        "vortex+" | "vortex" => Ok(Init::VortexSeed(1)),
        "vortex-" => Ok(Init::VortexSeed(-1)),
        "ring" => Ok(Init::RingSeed),
        t if t.starts_with("dipole:") => t[7..]
            .parse()
            .map(Init::DipoleSeed)
            .map_err(|_| GlError::InvalidArgument(format!("bad dipole count in '{t}'"))),
        t if t.starts_with("file:") => Ok(Init::FromFile(PathBuf::from(&t[5..]))),
        t => Err(GlError::InvalidArgument(format!("unknown init '{t}'"))),
    }
}

fn default_init(space: SymmetryClass) -> Init {
    match space {
        SymmetryClass::PhaseImprintOnly => Init::Soliton,
        SymmetryClass::Substrip(k) if k > 1 => Init::DipoleSeed(k),
        SymmetryClass::Radial3D => Init::RingSeed,
        _ => Init::VortexSeed(1),
    }
}

/// Grid matching a symmetry class: strips, axisymmetric cylinders (`nr = ny`) or sectors (`nrho = ny`).
pub fn grid_for_space(strip: &StripArgs, space: SymmetryClass, ntheta: usize) -> Result<Grid> {
    let l = strip.l.unwrap_or_else(|| default_length(strip.d));
    Ok(match space {
        SymmetryClass::Radial3D => Grid::Axi(AxiGrid::new(strip.d, l, strip.nx, strip.ny)?),
        SymmetryClass::Sector3D(ell) => Grid::Sector(SectorGrid3::new(strip.d, l, ell, strip.nx, strip.ny, ntheta)?),
        _ => Grid::Strip(strip.grid()?),
    })
}

fn load_or_soliton(field: &Option<PathBuf>, strip: &StripArgs) -> Result<Field2> {
    match field {
        Some(p) => read_field(p),
        None => Ok(discrete_soliton(Grid::Strip(strip.grid()?), 1e-10)?.field),
    }
}

impl MinimizeArgs {
    pub fn run(&self) -> Result<Outcome> {
        let space = parse_space(&self.space)?;
        let init = match &self.init {
            Some(s) => parse_init(s)?,
            None => default_init(space),
        };
        let grid = grid_for_space(&self.strip, space, self.ntheta)?;
        let cfg = MinimizeConfig {
            symmetry: space,
            init,
            tol_residual: self.tol,
            max_iter: self.max_iter,
            ..MinimizeConfig::default()
        };
        let m = minimize(&cfg, grid)?;
        println!(
            "energy {:.10} residual {:.2e} iterations {} converged {}",
            m.report.energy.total, m.report.residual, m.report.iterations, m.report.converged
        );
        let mut out = Outcome::new(grid);
        out.field(&self.out, &m.field)?;
        if let Some(p) = &self.csv {
            write_csv(&m.field, p)?;
            out.outputs.push(p.clone());
        }
        out.json(&self.report, &json!({ "grid": grid, "config": cfg, "report": m.report }))?;
        Ok(out)
    }
}

impl StabilityArgs {
    pub fn run(&self) -> Result<Outcome> {
        let f = load_or_soliton(&self.field, &self.strip)?;
        let space = parse_space(&self.space)?;
        let r = stability_eigs(&f, space, self.count)?;
        println!("eigenvalues {:?}", r.eigenvalues);
        let mut out = Outcome::new(*f.grid());
        let stable = r.eigenvalues.first().map(|&l| l > 0.0);
        out.json(&self.out, &json!({ "class": space, "stable": stable, "result": r }))?;
        Ok(out)
    }
}

impl SpectrumArgs {
    pub fn run(&self) -> Result<Outcome> {
        let v = self.variant.trim();
        if let Some(rest) = v.strip_prefix("disk:") {
            let class = match rest {
                "rad" => DiskClass::Radial,
                t if t.starts_with("ell:") => DiskClass::Ell(
                    t[4..].parse().map_err(|_| GlError::InvalidArgument(format!("bad disk class '{v}'")))?,
                ),
                _ => return Err(GlError::InvalidArgument(format!("unknown disk class '{v}'"))),
            };
            let r = disk_neumann_eigs(self.count, class, self.nr)?;
            println!("eigenvalues {:?}", r.eigenvalues);
            let mut out = Outcome::default();
            out.json(&self.out, &r)?;
            return Ok(out);
        }
        let (grid, weight, descriptor, field) = match (&self.field, self.soliton_weight) {
            (Some(_), true) => return Err(GlError::InvalidArgument("give either --field or --soliton-weight".into())),
            (Some(p), false) => {
                let f = read_field(p)?;
                let g = match f.grid() {
                    Grid::Strip(g) => *g,
                    _ => return Err(GlError::DimensionMismatch("pencil problems are posed on strips".into())),
                };
                (g, None, "1 - |u|^2 of the given field", Some(f))
            }
            (None, _) => {
                let g = self.strip.grid()?;
                (g, Some(soliton_weight(&Grid::Strip(g))), "sech^2", None)
            }
        };
        let r = match (v, &field, &weight) {
            ("mu", Some(f), _) => pencil_eigs(f, PencilVariant::Mu, self.count)?,
            ("tmu", Some(f), _) => pencil_eigs(f, PencilVariant::Tmu, self.count)?,
            ("lambda1", Some(f), _) => lambda_d1(f)?.eig,
            ("mu", None, Some(w)) => pencil_eigs_with_weight(grid, w, PencilVariant::Mu, self.count, descriptor)?,
            ("tmu", None, Some(w)) => pencil_eigs_with_weight(grid, w, PencilVariant::Tmu, self.count, descriptor)?,
            ("lambda1", None, Some(w)) => lambda_d1_with_weight(grid, w, None, descriptor)?.eig,
            _ => return Err(GlError::InvalidArgument(format!("unknown spectrum variant '{v}'"))),
        };
        println!("eigenvalues {:?}", r.eigenvalues);
        let mut out = Outcome::new(Grid::Strip(grid));
        out.json(&self.out, &r)?;
        Ok(out)
    }
}

impl MountainPassArgs {
    pub fn spec(&self) -> Result<PassSpec> {
        let dim = match self.dim.as_str() {
            "2" => Dimension::Two,
            "3rad" => Dimension::ThreeRadial,
            d => return Err(GlError::InvalidArgument(format!("unknown dimension '{d}'"))),
        };
        let length = match dim {
            Dimension::Two => self.l,
            Dimension::ThreeRadial => self.r,
        };
        Ok(PassSpec {
            d: self.d,
            dim,
            length,
            nx: self.nx,
            ny: self.ny,
            images: self.images,
            init: PassInit::parse(&self.init)?,
            iters: self.iters,
            no_saddle: self.no_saddle,
        })
    }

    pub fn run(&self) -> Result<Outcome> {
        let r = mountain_pass(&self.spec()?)?;
        let rep = &r.report;
        println!(
            "barrier {:.10} at image {} ({} string iterations), saddle energy {:?}, residual {:?}, negative directions {:?}",
            rep.barrier, rep.barrier_index, rep.string.iterations, rep.saddle_energy, rep.saddle_residual, rep.negative_directions
        );
        let mut out = Outcome::new(rep.grid);
        if let Some(p) = &self.out_path {
            write_fields(&r.path.images, p)?;
            out.outputs.push(p.clone());
        }
        if let Some(s) = &r.saddle {
            out.field(&self.out, s)?;
        }
        out.json(&self.report, rep)?;
        Ok(out)
    }
}

impl SweepArgs {
    pub fn spec(&self) -> Result<SweepSpec> {
        let d_values = match &self.d_values {
            Some(list) => list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| GlError::InvalidArgument(format!("bad d value '{s}'"))))
                .collect::<Result<Vec<_>>>()?,
            None => SweepSpec::range(self.d_min, self.d_max, self.d_step)?,
        };
        let tasks = self.tasks.split(',').map(Task::parse).collect::<Result<Vec<_>>>()?;
        Ok(SweepSpec {
            d_values,
            tasks,
            nodes_per_unit: self.nodes_per_unit,
            length: self.l,
            bisect: !self.no_bisect,
            tol: self.tol,
        })
    }

    pub fn run(&self) -> Result<Outcome> {
        let spec = self.spec()?;
        let rep = sweep(&spec)?;
        println!("d_c {:?} bracket {:?} departure {:?} workers {}", rep.d_c, rep.bracket, rep.departure_d, rep.workers);
        std::fs::create_dir_all(&self.out_dir)?;
        let csv = self.out_dir.join("sweep.csv");
        std::fs::write(&csv, sweep_csv(&rep))?;
        let mut out = Outcome { grid: None, outputs: vec![csv] };
        out.json(&Some(self.out_dir.join("sweep.json")), &rep)?;
        Ok(out)
    }
}

impl DecayArgs {
    pub fn run(&self) -> Result<Outcome> {
        let ud = match &self.field {
            Some(p) => read_field(p)?,
            None => {
                let cfg = MinimizeConfig { tol_residual: self.tol, ..MinimizeConfig::default() };
                minimize(&cfg, Grid::Strip(self.strip.grid()?))?.field
            }
        };
        let grid = *ud.grid();
        let us = discrete_soliton(grid, self.tol)?.field;
        let fit = decay_fit(&ud, &us)?;
        println!("window {:?} slope {:.4} polynomial tests {:?}", fit.window, fit.slope, fit.polynomial_test);
        let mut out = Outcome::new(grid);
        out.json(&self.out, &fit)?;
        Ok(out)
    }
}

impl CylinderArgs {
    pub fn run(&self) -> Result<Outcome> {
        match self.mode.as_str() {
            "profiles" => {
                let p = finite_cylinder_profiles(self.r, self.d, self.nx)?;
                let limit = 2.0 * SQRT_2 * PI * self.d * self.d / 3.0;
                let phase_bound = PI.powi(3) * self.d * self.d / (4.0 * self.r * self.r);
                println!(
                    "q_R {:.6e} soliton energy {:.6} (limit {:.6}) phase-winding energy {:.6} (bound {:.6})",
                    p.q_r, p.soliton_energy, limit, p.phase_energy, phase_bound
                );
                let mut out = Outcome::new(Grid::Axi(AxiGrid::new(self.d, self.r, self.nx, 3)?));
                out.json(
                    &self.report,
                    &json!({ "profile": p, "soliton_limit": limit, "phase_energy_bound": phase_bound,
                             "bounds": barrier_bounds(self.d, Dimension::ThreeRadial, None) }),
                )?;
                Ok(out)
            }
            "ring" => {
                let grid = AxiGrid::new(self.d, self.r, self.nx, self.nr)?;
                let (f, rep) = ring_candidate(grid, &RingOptions { tol: self.tol, ..RingOptions::default() })?;
                println!(
                    "ring candidate energy {:.6} in ({:.6}, {:.6}): {}, sign change {}, collapsed {}",
                    rep.energy,
                    rep.minimal_energy,
                    rep.soliton_energy,
                    rep.strictly_between,
                    rep.sign_change,
                    rep.collapsed
                );
                let mut out = Outcome::new(Grid::Axi(grid));
                out.field(&self.out, &f)?;
                out.json(&self.report, &rep)?;
                Ok(out)
            }
            "sector" => {
                let grid = SectorGrid3::new(self.d, self.r, self.ell, self.nx, self.nr, self.ntheta)?;
                let s = minimize_sector3d(grid, self.tol, 20_000)?;
                println!("sector energy {:.6} vortex regime {}", energy(&s.field).total, s.vortex_regime);
                let mut out = Outcome::new(Grid::Sector(grid));
                out.field(&self.out, &s.field)?;
                out.json(&self.report, &json!({ "vortex_regime": s.vortex_regime, "report": s.report }))?;
                Ok(out)
            }
            m => Err(GlError::InvalidArgument(format!("unknown cylinder mode '{m}'"))),
        }
    }
}

impl Command {
    pub fn run(&self) -> Result<Outcome> {
        match self {
            Command::Minimize(a) => a.run(),
            Command::Stability(a) => a.run(),
            Command::Spectrum(a) => a.run(),
            Command::MountainPass(a) => a.run(),
            Command::Sweep(a) => a.run(),
            Command::Decay(a) => a.run(),
            Command::Cylinder3d(a) => a.run(),
            Command::Run(a) => run_config(&a.config).map(|m| Outcome { grid: m.grid, outputs: m.outputs }),
        }
    }
}

/// Entry point of the binary.
pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match cli.command.run() {
        Ok(_) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_spaces_and_inits() {
        assert_eq!(parse_space("x").unwrap(), SymmetryClass::PhaseImprintOnly);
        assert_eq!(parse_space("substrip:2").unwrap(), SymmetryClass::Substrip(2));
        assert_eq!(parse_space("sector:3").unwrap(), SymmetryClass::Sector3D(3));
        assert_eq!(parse_init("dipole:2").unwrap(), Init::DipoleSeed(2));
        assert_eq!(parse_init("vortex-").unwrap(), Init::VortexSeed(-1));
        assert!(parse_init("spiral").is_err());
    }

    #[test]
    fn mountain_pass_flags() {
        let cli = Cli::try_parse_from(["gl-lab", "mountain-pass", "--d", "6", "--dim", "3rad", "--R", "40"]).unwrap();
        let Command::MountainPass(a) = cli.command else { panic!() };
        let s = a.spec().unwrap();
        assert_eq!(s.dim, Dimension::ThreeRadial);
        assert_eq!(s.length, Some(40.0));
    }
}
