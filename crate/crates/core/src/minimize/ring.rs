//! Axisymmetric vortex-ring candidate on the finite cylinder: a mountain pass
//! between the two phase-winding minimizers, relaxed through the map `j` that
//! re-minimizes with the trace on `x = 0` frozen.

use super::cylinder::{phase_minimizer, sample_cylinder_soliton};
use super::flow::{Flow, FlowOptions};
use crate::diagnostics::{first_component_changes_sign_at_centre, sign_pattern_check, SignPattern};
use crate::energy::{energy, second_variation};
use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::{AxiGrid, Grid};
use crate::mountain::{circle_path, climbing_image, string_method, ClimbOptions, PathState, StringOptions};
use crate::spectral::{bessel_j, bessel_prime_zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct RingOptions {
    pub images: usize,
    /// Partial `j` sweeps over all interior images.
    pub sweeps: usize,
    /// A string refinement precedes every `refine_every`-th sweep.
    pub refine_every: usize,
    pub string_iters: usize,
    /// String iterations after the last sweep, before the saddle refinement.
    pub final_string_iters: usize,
    /// Flow iterations per image and sweep.
    pub j_iters: usize,
    /// Radius of the initial circle around the soliton.
    pub radius: f64,
    pub tol: f64,
}

impl Default for RingOptions {
    fn default() -> Self {
        Self {
            images: 33,
            sweeps: 50,
            refine_every: 10,
            string_iters: 40,
            final_string_iters: 400,
            j_iters: 20,
            radius: 0.3,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingReport {
    pub d: f64,
    pub r: f64,
    pub energy: f64,
    /// Energy of the soliton `(0, Xi_R)` on the grid.
    pub soliton_energy: f64,
    /// Energy of the phase-winding minimizers.
    pub minimal_energy: f64,
    pub strictly_between: bool,
    pub sign_change: bool,
    pub hat_uv_sign: bool,
    /// Sup distance from the soliton.
    pub soliton_distance: f64,
    /// The candidate is the soliton (sup distance at most `1e-3`).
    pub collapsed: bool,
    pub residual: f64,
    pub converged: bool,
    pub ritz: Vec<f64>,
    pub negative_directions: usize,
    /// Exponent of `A_R = (1 - Xi_R^2)^alpha`.
    pub alpha: f64,
    /// Exponent used for the seed directions: `alpha`, or 1/2 when `alpha <= 0`.
    pub seed_exponent: f64,
    /// Second variation at the soliton along `(A_R J_0(j'_{0,1} r / d), 0)`.
    pub rayleigh_ring_mode: f64,
    /// Barrier of the relaxed path before the saddle refinement.
    pub path_barrier: f64,
    /// Cross-sectional mean of the candidate at `x = R/2`, normalized.
    pub tail: [f64; 2],
}

/// Partial `j`: `iters` flow iterations with the `x = 0` column frozen.
pub fn j_map(flow: &Flow, v: &Field2, iters: usize, tol: f64) -> Result<Field2> {
    let mut u = v.values().to_vec();
    let opts = FlowOptions { tol, max_iter: iters, clamp_warmup: 0, ..FlowOptions::default() };
    flow.run(&mut u, &opts)?;
    Field2::new(*v.grid(), u, v.tag())
}

fn trace_flow(grid: AxiGrid) -> Result<Flow> {
    let g = Grid::Axi(grid);
    let c = (grid.nx - 1) / 2;
    let fixed = (0..g.len()).map(|n| g.is_clamped(n) || n % grid.nx == c).collect();
    Flow::with_fixed(g, Some(SymmetryClass::Radial3D), fixed)
}

fn relax_path(flow: &Flow, path: &mut PathState, iters: usize, tol: f64) -> Result<()> {
    let m = path.len();
    let relaxed = path.images[1..m - 1].par_iter().map(|f| j_map(flow, f, iters, tol)).collect::<Result<Vec<_>>>()?;
    for (slot, f) in path.images[1..m - 1].iter_mut().zip(relaxed) {
        *slot = f;
    }
    path.refresh();
    Ok(())
}

/// Soliton, phase-winding endpoints and seed directions on a finite cylinder.
#[derive(Clone, Debug)]
pub struct RingSetup {
    /// The flowed soliton `(0, Xi_R)`.
    pub soliton: Field2,
    pub minus: Field2,
    pub plus: Field2,
    /// `(A_R, 0)`, the unstable direction at the soliton.
    pub amplitude: Field2,
    /// `(A_R J_0(j'_{0,1} r / d), 0)`.
    pub ring_mode: Field2,
    pub alpha: f64,
    pub seed_exponent: f64,
}

impl RingSetup {
    pub fn new(grid: AxiGrid) -> Result<Self> {
        let d = grid.d;
        let g = Grid::Axi(grid);
        let s = SymmetryClass::Radial3D;
        let (plus, _) = phase_minimizer(grid, 1e-9)?;
        let minus = plus.conjugate_branch();
        let full = Flow::new(g, Some(s))?;
        let mut v = sample_cylinder_soliton(grid)?.into_values();
        full.run(&mut v, &FlowOptions { tol: 1e-9, max_iter: 50_000, ..FlowOptions::default() })?;
        let soliton = Field2::new(g, v, Some(s))?;
        let j01 = bessel_prime_zero(0)?;
        let alpha = 0.5 * (1.5 - j01 * j01 / (d * d));
        let seed_exponent = if alpha > 0.0 { alpha } else { 0.5 };
        let a_r: Vec<[f64; 2]> =
            soliton.values().iter().map(|u| [(1.0 - u[1] * u[1]).max(0.0).powf(seed_exponent), 0.0]).collect();
        let ring_mode: Vec<[f64; 2]> =
            (0..g.len()).map(|n| [a_r[n][0] * bessel_j(0, j01 * g.position(n)[1] / d), 0.0]).collect();
        Ok(Self {
            amplitude: Field2::direction(g, a_r)?,
            ring_mode: Field2::direction(g, ring_mode)?,
            soliton,
            minus,
            plus,
            alpha,
            seed_exponent,
        })
    }

    /// Path from `minus` to `plus` through a circle of radius `radius` around
    /// the soliton in the plane of the two seed directions, `images` equal-arc images.
    pub fn circle_path(&self, radius: f64, images: usize) -> Result<PathState> {
        circle_path(&self.soliton, &self.amplitude, &self.ring_mode, radius, &self.minus, &self.plus, 8)?
            .reparametrized(images)
    }
}

/// Searches for the axisymmetric mountain-pass critical point on the finite
/// cylinder `[-R, R] x disk(d)` described by `grid` (with `grid.l = R`).
pub fn ring_candidate(grid: AxiGrid, opts: &RingOptions) -> Result<(Field2, RingReport)> {
    let (d, r) = (grid.d, grid.l);
    let g = Grid::Axi(grid);
    let s = SymmetryClass::Radial3D;
    let setup = RingSetup::new(grid)?;
    let soliton = &setup.soliton;
    let soliton_energy = energy(soliton).total;
    let minimal_energy = energy(&setup.plus).total;
    let rayleigh_ring_mode = second_variation(soliton, &setup.ring_mode)?;
    let mut path = setup.circle_path(opts.radius, opts.images)?;
    let jflow = trace_flow(grid)?;
    let string_opts = StringOptions {
        iters: opts.string_iters,
        stall_window: 0,
        mirror: false,
        monotone: false,
        ..StringOptions::default()
    };
    for sweep in 0..opts.sweeps {
        if sweep % opts.refine_every.max(1) == 0 {
            path = string_method(path, s, &string_opts)?.0;
        }
        relax_path(&jflow, &mut path, opts.j_iters, 1e-10)?;
    }
    path = string_method(path, s, &StringOptions { iters: opts.final_string_iters, ..string_opts })?.0;
    let path_barrier = path.barrier;
    let climb = ClimbOptions { tol: opts.tol, ..ClimbOptions::default() };
    let (field, residual, converged, ritz, negative_directions) = match climbing_image(&path, s, &climb) {
        Ok((f, rep)) => (f, rep.residual, true, rep.ritz, rep.negative_directions),
        Err(GlError::NotConverged { .. } | GlError::StepUnderflow { .. }) => {
            let f = path.images[path.barrier_index].clone();
            let res = crate::energy::residual_sup(&f);
            (f, res, false, Vec::new(), 0)
        }
        Err(e) => return Err(e),
    };
    let e = energy(&field).total;
    let soliton_distance = field.sup_distance(soliton);
    let quarter = grid.nx - 1 - (grid.nx - 1) / 4;
    let q = g.stencil().weights;
    let (mut ta, mut tb) = (0.0, 0.0);
    for j in 0..grid.nr {
        let (w, u) = (q[g.index(quarter, j, 0)], field.at(quarter, j, 0));
        ta += w * u[0];
        tb += w * u[1];
    }
    let norm = ta.hypot(tb);
    let report = RingReport {
        d,
        r,
        energy: e,
        soliton_energy,
        minimal_energy,
        strictly_between: e > minimal_energy && e < soliton_energy,
        sign_change: first_component_changes_sign_at_centre(&field)?,
        hat_uv_sign: sign_pattern_check(&field, SignPattern::HatUVSign)?.ok,
        soliton_distance,
        collapsed: soliton_distance <= 1e-3,
        residual,
        converged,
        ritz,
        negative_directions,
        alpha: setup.alpha,
        seed_exponent: setup.seed_exponent,
        rayleigh_ring_mode,
        path_barrier,
        tail: if norm > 0.0 { [ta / norm, tb / norm] } else { [0.0, 0.0] },
    };
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_map_keeps_the_trace_and_lowers_energy() {
        let grid = AxiGrid::new(3.0, 10.0, 81, 9).unwrap();
        let flow = trace_flow(grid).unwrap();
        let g = Grid::Axi(grid);
        let v = Field2::from_fn(g, |p| [0.3 * (1.0 - p[1] / 3.0), (p[0] / 2.0).tanh()]);
        let v = crate::field::project_symmetry(&v, SymmetryClass::Radial3D).unwrap();
        let w = j_map(&flow, &v, 200, 1e-10).unwrap();
        let c = (grid.nx - 1) / 2;
        for j in 0..grid.nr {
            assert_eq!(w.at(c, j, 0), v.at(c, j, 0));
        }
        assert!(energy(&w).total < energy(&v).total);
        // j is idempotent once converged.
        let ww = j_map(&flow, &w, 200, 1e-10).unwrap();
        assert!(ww.sup_distance(&w) < 1e-6);
    }
}
