//! Mountain-pass barriers on strips below and above the threshold: explicit
//! path, string method, climbing image, and the closed-form bounds.
//!
//! Usage: `mountain_pass [d] [nx] [ny]` (default: both d = 1.5 and d = 3).

use gl_lab::energy::energy;
use gl_lab::minimize::{discrete_soliton, minimize, MinimizeConfig};
use gl_lab::mountain::{
    barrier_bounds, climbing_image, explicit_path, mean_zero_crossing, string_method, ClimbOptions, Dimension,
    ExplicitOptions, Regime, StringOptions, DEFAULT_IMAGES,
};
use gl_lab::{Grid, StripGrid, SymmetryClass};
use std::time::Instant;

fn run(d: f64, nx: usize, ny: usize) -> gl_lab::Result<()> {
    let grid = Grid::Strip(StripGrid::new(d, 30.0, nx, ny)?);
    let t = Instant::now();
    let us = discrete_soliton(grid, 1e-9)?.field;
    let ud = minimize(&MinimizeConfig { tol_residual: 1e-9, ..Default::default() }, grid)?.field;
    let (e_s, e_d) = (energy(&us).total, energy(&ud).total);
    println!("d = {d}: energy u_s {e_s:.6}, minimizer in the imparity class {e_d:.6}");
    let opts = ExplicitOptions { endpoint_reference: Some(e_d.min(e_s)), ..Default::default() };
    let ex = explicit_path(Regime::Soliton, &us, &opts)?;
    println!(
        "explicit path: n = {}, {} images, barrier {:.6} (budget {:.6})",
        ex.n,
        ex.path.len(),
        ex.path.barrier,
        ex.budget
    );
    for s in &ex.stages {
        println!("  stage {:<24} max energy {:.6}", s.stage, s.max_energy);
    }
    let start = ex.path.reparametrized(DEFAULT_IMAGES)?;
    let (path, rep) = string_method(start, SymmetryClass::PhaseImprintOnly, &StringOptions::default())?;
    println!(
        "string: {} iterations (converged {}), barrier {:.6} at image {}, perpendicular residual {:.1e}, {} rejected reparametrizations",
        rep.iterations, rep.converged, path.barrier, path.barrier_index, rep.max_perpendicular_residual, rep.rejected_reparametrizations
    );
    let z = mean_zero_crossing(&path)?;
    println!("mean-zero image {}: |int u1(0,y) dy| = {:.1e} <= {:.1e}: {}", z.index, z.value.abs(), z.bound, z.ok);
    let (saddle, s) = climbing_image(&path, SymmetryClass::PhaseImprintOnly, &ClimbOptions::default())?;
    println!(
        "saddle: energy {:.6}, residual {:.1e} after {} iterations, Ritz {:?}, negative directions {}",
        s.energy, s.residual, s.iterations, s.ritz, s.negative_directions
    );
    let to_ud = saddle.sup_distance(&ud).min(saddle.sup_distance(&ud.conjugate_branch()));
    println!("  distance to u_s {:.2e}, to the nearer branch of u_d {:.2e}", saddle.sup_distance(&us), to_ud);
    let b = barrier_bounds(d, Dimension::Two, Some(e_d));
    println!("bounds: lower {:?}, upper {:?} ({})  [{:.1?}]\n", b.lower, b.upper, b.upper_source, t.elapsed());
    Ok(())
}

fn main() -> gl_lab::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (nx, ny) = (args.get(1).map_or(241, |&v| v as usize), args.get(2).map_or(25, |&v| v as usize));
    match args.first() {
        Some(&d) => run(d, nx, ny),
        None => {
            run(1.5, nx, ny)?;
            run(3.0, nx, ny)
        }
    }
}
