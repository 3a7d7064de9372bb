//! Axisymmetric vortex-ring candidate on a finite cylinder, found as a mountain
//! pass between the two phase-winding minimizers. Below the radial threshold the
//! candidate collapses onto the soliton.
//!
//! Usage: `vortex_ring [d] [R] [nx] [nr]` (default: d = 6 and d = 3, R = 40).

use gl_lab::minimize::{ring_candidate, RingOptions};
use gl_lab::AxiGrid;
use std::time::Instant;

fn run(d: f64, r: f64, nx: usize, nr: usize) -> gl_lab::Result<()> {
    let t = Instant::now();
    let (field, rep) = ring_candidate(AxiGrid::new(d, r, nx, nr)?, &RingOptions::default())?;
    println!("d = {d}, R = {r}: phase minimizers {:.5}, soliton {:.5}", rep.minimal_energy, rep.soliton_energy);
    println!("  second variation along the ring mode {:.4} (alpha {:.4})", rep.rayleigh_ring_mode, rep.alpha);
    println!("  relaxed path barrier {:.5}", rep.path_barrier);
    println!(
        "  candidate energy {:.5} (strictly between: {}), residual {:.1e} (converged {}), Ritz {:?}, negative directions {}",
        rep.energy, rep.strictly_between, rep.residual, rep.converged, rep.ritz, rep.negative_directions
    );
    println!(
        "  first component changes sign at x = 0: {}, (U, V) sign pattern: {}, collapsed onto the soliton: {} (distance {:.1e})",
        rep.sign_change, rep.hat_uv_sign, rep.collapsed, rep.soliton_distance
    );
    let g = field.grid();
    let c = (g.nx() - 1) / 2;
    let col: Vec<String> = (0..g.dims()[1]).step_by(4).map(|j| format!("{:+.3}", field.at(c, j, 0)[0])).collect();
    println!("  U(0, r): {}", col.join(" "));
    println!("  tail direction at x = R/2: {:?}  [{:.1?}]\n", rep.tail, t.elapsed());
    Ok(())
}

fn main() -> gl_lab::Result<()> {
    let a: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let r = a.get(1).copied().unwrap_or(40.0);
    let (nx, nr) = (a.get(2).map_or(321, |&v| v as usize), a.get(3).map_or(25, |&v| v as usize));
    match a.first() {
        Some(&d) => run(d, r, nx, nr),
        None => {
            run(6.0, r, nx, nr)?;
            run(3.0, r, nx, nr)
        }
    }
}
