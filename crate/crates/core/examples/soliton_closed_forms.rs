//! The soliton `(0, tanh(x / sqrt 2))` on strips: energy per unit width against
//! a fine one-dimensional quadrature, second-order decay of the discrete
//! residual, and the second variations along the amplitude and first
//! transverse modes.

use gl_lab::energy::{energy, residual_sup, second_variation};
use gl_lab::{Field2, Grid, StripGrid, SOLITON_LINE_ENERGY, STRIP_THRESHOLD};
use std::f64::consts::{PI, SQRT_2};

fn soliton(grid: Grid) -> Field2 {
    Field2::from_fn(grid, |p| [0.0, (p[0] / SQRT_2).tanh()])
}

/// Midpoint rule for the one-dimensional soliton energy on `[-l, l]`.
fn line_energy(l: f64, points: usize) -> f64 {
    let h = 2.0 * l / points as f64;
    (0..points)
        .map(|i| {
            let x = -l + (i as f64 + 0.5) * h;
            let s = 1.0 / (x / SQRT_2).cosh();
            let t = (x / SQRT_2).tanh();
            0.5 * (s * s / SQRT_2).powi(2) + 0.25 * (1.0 - t * t).powi(2)
        })
        .sum::<f64>()
        * h
}

fn main() -> gl_lab::Result<()> {
    let l = 30.0;
    let oracle = line_energy(l, 1_000_000);
    println!("line energy: quadrature {oracle:.10}, closed form {SOLITON_LINE_ENERGY:.10}");
    for d in [1.0, 1.5, 3.0] {
        let g = Grid::Strip(StripGrid::new(d, l, 1025, 65)?);
        let e = energy(&soliton(g)).total / (2.0 * d);
        println!("  d = {d}: energy per unit width {e:.8}, relative error {:.2e}", e / oracle - 1.0);
    }

    println!("\nresidual under refinement (d = 1.5):");
    let mut prev: Option<f64> = None;
    for nx in [257, 513, 1025, 2049] {
        let r = residual_sup(&soliton(Grid::Strip(StripGrid::new(1.5, l, nx, 9)?)));
        match prev {
            Some(p) => println!("  nx = {nx:5}: sup residual {r:.3e}, observed order {:.3}", (p / r).log2()),
            None => println!("  nx = {nx:5}: sup residual {r:.3e}"),
        }
        prev = Some(r);
    }

    println!("\nsecond variations, A = sech(x / sqrt 2):");
    for d in [1.5, STRIP_THRESHOLD, 3.0] {
        let g = Grid::Strip(StripGrid::new(d, l, 1025, 65)?);
        let us = soliton(g);
        let a = |p: [f64; 3]| 1.0 / (p[0] / SQRT_2).cosh();
        let amp = Field2::direction(g, (0..g.len()).map(|n| [a(g.position(n)), 0.0]).collect())?;
        let tr = Field2::direction(
            g,
            (0..g.len()).map(|n| g.position(n)).map(|p| [a(p) * (PI * p[1] / (2.0 * d)).sin(), 0.0]).collect(),
        )?;
        let (qa, qt) = (second_variation(&us, &amp)?, second_variation(&us, &tr)?);
        let (ea, et) = (-2.0 * SQRT_2 * d, d * SQRT_2 * (PI * PI / (2.0 * d * d) - 1.0));
        println!("  d = {d:.4}: amplitude {qa:+.6} vs {ea:+.6}; transverse {qt:+.6} vs {et:+.6}");
    }
    Ok(())
}
