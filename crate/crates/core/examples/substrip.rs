//! Substrip minimizer on a strip of half-width 5 split into two substrips:
//! each piece is the solitonic vortex of half-width 5/2, and the whole has
//! more energy than the single solitonic vortex.

use gl_lab::energy::energy;
use gl_lab::minimize::{minimize, minimize_substrip, MinimizeConfig};
use gl_lab::{Grid, StripGrid};
use std::time::Instant;

fn main() -> gl_lab::Result<()> {
    let (d, k) = (5.0, 2);
    let g = StripGrid::new(d, 30.0, 1025, 129)?;
    let t = Instant::now();
    let sub = minimize_substrip(k, g, 1e-8)?;
    let ud = minimize(&MinimizeConfig { tol_residual: 1e-8, ..Default::default() }, Grid::Strip(g))?;
    let (e_sub, e_d) = (energy(&sub.field).total, ud.report.energy.total);
    println!("u_(d,{k}): energy {e_sub:.6}, converged {}, residual {:.1e}", sub.report.converged, sub.report.residual);
    println!("u_d:      energy {e_d:.6}, converged {}", ud.report.converged);
    println!("u_(d,{k}) - u_d = {:.6} > 0: {}", e_sub - e_d, e_sub > e_d);
    println!(
        "tiling: {k} x energy of one substrip {:.8}, relative gap {:.1e}, nodewise gap to the d/{k} vortex {:.1e}  [{:.1?}]",
        sub.tiled_energy,
        (sub.tiled_energy / e_sub - 1.0).abs(),
        sub.tiling_gap,
        t.elapsed()
    );
    let flat = k as f64 * energy(&sub.flat).total;
    println!("{k} x energy of the independent d/{k} vortex {flat:.8}, relative gap {:.1e}", (flat / e_sub - 1.0).abs());
    Ok(())
}
