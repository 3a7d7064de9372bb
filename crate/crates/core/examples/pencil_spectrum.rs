//! Weighted Neumann pencil `-Laplace phi = mu (1 - |u|^2) phi` at the soliton
//! threshold and at the solitonic vortex of a wider strip, with the sibling
//! problem and the mixed problem on the half-strip.

use gl_lab::minimize::{minimize, MinimizeConfig};
use gl_lab::spectral::{
    lambda_d1, legendre_check, pencil_eigs, pencil_eigs_with_weight, soliton_weight, subspace_angle, PencilVariant,
};
use gl_lab::{Grid, StripGrid, STRIP_THRESHOLD};

fn main() -> gl_lab::Result<()> {
    let g = StripGrid::new(STRIP_THRESHOLD, 30.0, 1025, 65)?;
    let w = soliton_weight(&Grid::Strip(g));
    let r = pencil_eigs_with_weight(g, &w, PencilVariant::Mu, 4, "sech^2(x / sqrt 2)")?;
    let check = legendre_check(&r.eigenvalues, 1e-2);
    println!("threshold pencil {:?}", r.eigenvalues);
    println!(
        "  matched {:?}, multiplicities {:?}, max deviation {:.2e}",
        check.matched, check.multiplicities, check.max_deviation
    );

    let g = StripGrid::new(3.0, 30.0, 1025, 65)?;
    let u = minimize(&MinimizeConfig::default(), Grid::Strip(g))?.field;
    let mu = pencil_eigs(&u, PencilVariant::Mu, 4)?;
    println!("d = 3 pencil {:?}, clusters {:?}", mu.eigenvalues, mu.clusters);
    println!("  nodal counts {:?}", mu.nodal_counts);
    let weights: Vec<f64> = Grid::Strip(g)
        .stencil()
        .weights
        .iter()
        .zip(u.values())
        .map(|(q, v)| q * (1.0 - v[0] * v[0] - v[1] * v[1]).max(0.0))
        .collect();
    let angle = subspace_angle(&mu.eigenfields[1..3], &[u.component(0), u.component(1)], &weights);
    println!("  angle between the mu = 1 eigenspace and span(U, V): {angle:.2e}");
    let tmu = pencil_eigs(&u, PencilVariant::Tmu, 4)?;
    println!("sibling pencil {:?}", tmu.eigenvalues);
    let l1 = lambda_d1(&u)?;
    println!("lambda_d1 = {:.6}, Rayleigh quotient of dU/dy = {:.6}", l1.eig.eigenvalues[0], l1.rayleigh_dy_u.unwrap());
    Ok(())
}
