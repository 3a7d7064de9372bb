//! Cylinder thresholds from the disk cross-section: Bessel-derivative zeros,
//! Neumann disk eigenvalues, the second variation at the soliton along
//! `(A J_1(j'_{1,1} rho / d) cos theta, 0)`, and sector minimizers on either
//! side of `sqrt 2 j'_{1,1}`.

use gl_lab::energy::{energy, second_variation};
use gl_lab::minimize::minimize_sector3d;
use gl_lab::spectral::{bessel_j, bessel_prime_zero, disk_neumann_eigs, DiskClass};
use gl_lab::{Field2, Grid, SectorGrid3};
use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

/// Second variation at the sampled soliton along the `ell = 1` disk mode,
/// normalized to unit mean square over the cross-section.
fn disk_mode_variation(d: f64, nx: usize, nrho: usize, ntheta: usize) -> gl_lab::Result<f64> {
    let j = bessel_prime_zero(1)?;
    let norm = (PI * 0.5 * (1.0 - 1.0 / (j * j)) * bessel_j(1, j).powi(2)).sqrt();
    let g = Grid::Sector(SectorGrid3::new(d, 30.0, 1, nx, nrho, ntheta)?);
    let us = Field2::from_fn(g, |p| [0.0, (p[0] / SQRT_2).tanh()]);
    let w = Field2::direction(
        g,
        (0..g.len())
            .map(|n| {
                let p = g.position(n);
                let (rho, th) = (p[1].hypot(p[2]), p[2].atan2(p[1]));
                [bessel_j(1, j * rho / d) * th.cos() / norm / (p[0] / SQRT_2).cosh(), 0.0]
            })
            .collect(),
    )?;
    second_variation(&us, &w)
}

fn main() -> gl_lab::Result<()> {
    let (j0, j1) = (bessel_prime_zero(0)?, bessel_prime_zero(1)?);
    println!("j'_01 = {j0:.10}, j'_11 = {j1:.10}, j'_21 = {:.10}", bessel_prime_zero(2)?);
    let rad = disk_neumann_eigs(2, DiskClass::Radial, 400)?;
    let ell = disk_neumann_eigs(1, DiskClass::Ell(1), 400)?;
    println!("disk radial {:?} vs (j'_01)^2 = {:.6}", rad.eigenvalues, j0 * j0);
    println!("disk ell=1  {:?} vs (j'_11)^2 = {:.6}", ell.eigenvalues, j1 * j1);
    println!("thresholds: sqrt2 j'_11 = {:.6}, sqrt2 j'_01 = {:.6}", SQRT_2 * j1, SQRT_2 * j0);

    println!("\nsecond variation along the ell = 1 disk mode:");
    for d in [2.0, SQRT_2 * j1, 3.0] {
        let q = disk_mode_variation(d, 401, 33, 17)?;
        let exact = SQRT_2 * (2.0 * j1 * j1 - d * d);
        println!(
            "  d = {d:.4}: computed {q:+.5}, sqrt2 (2 j'^2 - d^2) = {exact:+.5}, d^2 (2 j'^2 / d^2 - 1) = {:+.5}",
            2.0 * j1 * j1 - d * d
        );
    }

    println!("\nsector minimizers, ell = 1:");
    for d in [2.0, 3.5] {
        let t = Instant::now();
        let g = SectorGrid3::new(d, 24.0, 1, 193, 17, 9)?;
        let s = minimize_sector3d(g, 1e-6, 20_000)?;
        let soliton = Field2::from_fn(Grid::Sector(g), |p| [0.0, (p[0] / SQRT_2).tanh()]);
        println!(
            "  d = {d}: energy {:.5} (sampled soliton {:.5}), vortex line {}, converged {} in {} iterations [{:.1?}]",
            energy(&s.field).total,
            energy(&soliton).total,
            s.vortex_regime,
            s.report.converged,
            s.report.iterations,
            t.elapsed()
        );
    }
    Ok(())
}
