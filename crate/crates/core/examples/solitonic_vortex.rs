//! Solitonic vortex on a strip of half-width 3: minimize in the imparity
//! class from both seed signs, then compare with the soliton.

use gl_lab::diagnostics::{sign_pattern_check, SignPattern};
use gl_lab::energy::energy;
use gl_lab::minimize::{discrete_soliton, minimize, Init, MinimizeConfig};
use gl_lab::{Grid, StripGrid};
use std::time::Instant;

fn main() -> gl_lab::Result<()> {
    let d = 3.0;
    let grid = Grid::Strip(StripGrid::new(d, 30.0, 1025, 65)?);
    let t = Instant::now();
    let plus = minimize(&MinimizeConfig { init: Init::VortexSeed(1), ..Default::default() }, grid)?;
    println!(
        "u_d^+: {} iterations, residual {:.2e}, energy {:.6} ({:.1?})",
        plus.report.iterations,
        plus.report.residual,
        plus.report.energy.total,
        t.elapsed()
    );
    let minus = minimize(&MinimizeConfig { init: Init::VortexSeed(-1), ..Default::default() }, grid)?;
    let soliton = discrete_soliton(grid, 1e-8)?;
    let diag = plus.report.diagnostics.as_ref().expect("strip diagnostics");
    println!("zeros {:?}, windings {:?}", diag.zeros, diag.windings);
    println!("UVSign holds: {}", sign_pattern_check(&plus.field, SignPattern::UVSign)?.ok);
    println!("branch gap |u^+ - conj(u^-)|: {:.2e}", plus.field.sup_distance(&minus.field.conjugate_branch()));
    println!("energy u_s {:.6} vs u_d {:.6}", energy(&soliton.field).total, plus.report.energy.total);
    Ok(())
}
