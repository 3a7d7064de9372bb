//! Finite cylinders `[-R, R] x disk(d)`: the first integral `q_R`, the energy
//! of the soliton profile against its infinite-cylinder limit, and the
//! phase-winding minimizer.

use gl_lab::minimize::finite_cylinder_profiles;
use std::f64::consts::{PI, SQRT_2};

fn main() -> gl_lab::Result<()> {
    let d = 3.0;
    let limit = 2.0 * SQRT_2 * PI * d * d / 3.0;
    println!("d = {d}, soliton energy limit 2 sqrt2 pi d^2 / 3 = {limit:.6}");
    println!(
        "{:>4} {:>12} {:>12} {:>10} {:>12} {:>14} {:>8}",
        "R", "q_R", "soliton E", "rel. gap", "phase E", "pi^3 d^2/4R^2", "R x E"
    );
    for r in [5.0, 10.0, 20.0, 40.0] {
        let p = finite_cylinder_profiles(r, d, 2001)?;
        let bound = PI.powi(3) * d * d / (4.0 * r * r);
        println!(
            "{r:>4} {:>12.4e} {:>12.6} {:>10.2e} {:>12.6} {:>14.6} {:>8.4}",
            p.q_r,
            p.soliton_energy,
            p.soliton_energy / limit - 1.0,
            p.phase_energy,
            bound,
            r * p.phase_energy
        );
    }
    println!(
        "the phase energy scales like 1/R: the last column tends to pi^3 d^2 / 4 = {:.4}",
        PI.powi(3) * d * d / 4.0
    );
    Ok(())
}
