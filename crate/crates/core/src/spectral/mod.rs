//! Linearized spectra: first-direction stability, weighted Neumann pencils
//! `-Laplace phi = mu w phi` with `w = 1 - |u|^2`, the mixed problem on the
//! half-strip, Hessian Ritz values, and closed-form oracles.

mod oracles;

pub use oracles::{
    bessel_j, bessel_j_prime, bessel_prime_zero, disk_neumann_eigs, legendre_check, legendre_spectrum, DiskClass,
    LegendreReport, OracleTable,
};

use crate::diagnostics::{nodal_domains_dims, nodal_domains_in_class};
use crate::error::{GlError, Result};
use crate::field::{project_scalar_first, project_values, Field2, SymmetryClass};
use crate::grid::{band_order, Grid, Stencil, StripGrid};
use crate::linalg::{lowest_eigenpairs, CsrSym, EigenOptions, Projector};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Nodes with `w` below this fraction of `max w` are dropped from the weight.
pub const WEIGHT_FLOOR: f64 = 1e-13;

/// Eigenvalues closer than this are grouped into one cluster.
pub const CLUSTER_WIDTH: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    FirstDirectionStability,
    PencilMu,
    PencilTmu,
    Lambda1,
    DiskNeumann,
    Hessian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PencilVariant {
    /// The pencil on the strip itself.
    Mu,
    /// The pencil on the doubled strip `0 < y < 2d`, weight extended evenly across `y = d`.
    Tmu,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenResult {
    pub problem: Problem,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Node values on `dims`, normalized in the weighted inner product.
    #[serde(skip)]
    pub eigenfields: Vec<Vec<f64>>,
    #[serde(skip)]
    pub dims: [usize; 3],
    pub residuals: Vec<f64>,
    pub weight_descriptor: String,
    pub clusters: Vec<Vec<f64>>,
    /// Nodal domains per eigenfield, on the fundamental domain of the class when one is imposed.
    pub nodal_counts: Vec<usize>,
}

/// Groups ascending values whose consecutive gaps are at most `width`.
pub fn clusters(values: &[f64], width: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some(c) if v - *c.last().unwrap() <= width => c.push(v),
            _ => out.push(vec![v]),
        }
    }
    out
}

/// `sech^2(x / sqrt 2)`, the weight `1 - |u_s|^2` of the soliton, sampled on `grid`.
pub fn soliton_weight(grid: &Grid) -> Vec<f64> {
    (0..grid.len())
        .map(|n| {
            let c = (grid.position(n)[0] / SQRT_2).cosh();
            1.0 / (c * c)
        })
        .collect()
}

/// `1 - |u|^2` at every node.
pub fn field_weight(f: &Field2) -> Vec<f64> {
    f.values().iter().map(|v| 1.0 - (v[0] * v[0] + v[1] * v[1])).collect()
}

struct Assembly {
    k: CsrSym,
    free: Vec<usize>,
    index: Vec<usize>,
}

/// Stiffness `sum c (phi_a - phi_b)^2` plus `diag`, restricted to the nodes not in `dirichlet`.
fn assemble(stencil: &Stencil, diag: &[f64], dirichlet: &[bool]) -> Assembly {
    let n = stencil.len();
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if !dirichlet[v] {
            index[v] = free.len();
            free.push(v);
        }
    }
    let mut trips: Vec<(usize, usize, f64)> = free.iter().enumerate().map(|(k, &v)| (k, k, diag[v])).collect();
    stencil.for_each_edge(|a, b, c| {
        let (ia, ib) = (index[a], index[b]);
        if ia != usize::MAX {
            trips.push((ia, ia, c));
        }
        if ib != usize::MAX {
            trips.push((ib, ib, c));
        }
        if ia != usize::MAX && ib != usize::MAX {
            trips.push((ia.min(ib), ia.max(ib), -c));
        }
    });
    Assembly { k: CsrSym::from_triplets(free.len(), &trips), free, index }
}

impl Assembly {
    fn order(&self, dims: [usize; 3]) -> Vec<usize> {
        band_order(dims).into_iter().filter(|&v| self.index[v] != usize::MAX).map(|v| self.index[v]).collect()
    }

    fn expand(&self, x: &[f64], n: usize) -> Vec<f64> {
        let mut full = vec![0.0; n];
        for (k, &v) in self.free.iter().enumerate() {
            full[v] = x[k];
        }
        full
    }
}

/// Flips `v` so that its entry of largest magnitude is positive.
fn fix_sign(v: &mut [f64]) {
    let big = v.iter().cloned().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest `count` eigenpairs of `(stiffness + diag) phi = mu (q m) phi` on the
/// nodes outside `dirichlet`.
#[allow(clippy::too_many_arguments)]
fn solve_scalar(
    stencil: &Stencil,
    diag: &[f64],
    mass: &[f64],
    dirichlet: &[bool],
    count: usize,
    shift: f64,
    problem: Problem,
    descriptor: String,
    project: Option<Projector<'_>>,
) -> Result<EigenResult> {
    let n = stencil.len();
    let asm = assemble(stencil, diag, dirichlet);
    let m: Vec<f64> = asm.free.iter().map(|&v| stencil.weights[v] * mass[v]).collect();
    let q: Vec<f64> = asm.free.iter().map(|&v| stencil.weights[v]).collect();
    let order = asm.order(stencil.dims);
    let local_project = project.map(|p| {
        let asm = &asm;
        move |x: &mut [f64]| {
            let mut full = asm.expand(x, n);
            p(&mut full);
            for (k, &v) in asm.free.iter().enumerate() {
                x[k] = full[v];
            }
        }
    });
    let opts = EigenOptions { shift, ..EigenOptions::default() };
    let pairs = lowest_eigenpairs(
        &asm.k,
        &m,
        &q,
        &order,
        count,
        &opts,
        local_project.as_ref().map(|f| f as &dyn Fn(&mut [f64])),
    )?;
    let mut fields = Vec::with_capacity(count);
    let mut nodal = Vec::with_capacity(count);
    for x in &pairs.vectors {
        let mut full = asm.expand(x, n);
        fix_sign(&mut full);
        nodal.push(nodal_domains_dims(&full, stencil.dims)?);
        fields.push(full);
    }
    Ok(EigenResult {
        problem,
        clusters: clusters(&pairs.values, CLUSTER_WIDTH),
        eigenvalues: pairs.values,
        eigenfields: fields,
        dims: stencil.dims,
        residuals: pairs.residuals,
        weight_descriptor: descriptor,
        nodal_counts: nodal,
    })
}

fn floored(w: &[f64]) -> Result<Vec<f64>> {
    let max = w.iter().cloned().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Err(GlError::InvalidArgument("weight vanishes identically".into()));
    }
    Ok(w.iter().map(|&x| if x < WEIGHT_FLOOR * max { 0.0 } else { x }).collect())
}

fn check_weight(grid: &Grid, w: &[f64]) -> Result<()> {
    if w.len() != grid.len() {
        return Err(GlError::DimensionMismatch("weight length differs from the grid".into()));
    }
    // Far from the core |u| rounds to 1; only weights clearly below zero are rejected.
    let max = w.iter().cloned().fold(0.0f64, f64::max);
    if let Some(n) = (0..w.len()).find(|&n| !grid.is_clamped(n) && !(w[n] >= -WEIGHT_FLOOR * max)) {
        return Err(GlError::InvalidArgument(format!(
            "weight {:e} is negative at interior node {n}; the field is not a converged minimizer",
            w[n]
        )));
    }
    Ok(())
}

/// Evenly extends nodal values on the upper half `0 <= y <= d` across `y = d`,
/// giving values on a strip of the same size that represents `0 <= y <= 2d`.
pub fn doubled_strip<T: Copy>(grid: &StripGrid, values: &[T]) -> Vec<T> {
    let (nx, ny) = (grid.nx, grid.ny);
    let c = (ny - 1) / 2;
    let mut out = Vec::with_capacity(values.len());
    for j in 0..ny {
        let src = if j <= c { c + j } else { c + (ny - 1 - j) };
        out.extend_from_slice(&values[nx * src..nx * (src + 1)]);
    }
    out
}

/// The lowest `count` eigenpairs of `-Laplace phi = mu w phi` with Neumann
/// conditions on the whole boundary of the strip.
pub fn pencil_eigs_with_weight(
    grid: StripGrid,
    w: &[f64],
    variant: PencilVariant,
    count: usize,
    descriptor: &str,
) -> Result<EigenResult> {
    let g = Grid::Strip(grid);
    check_weight(&g, w)?;
    let (w, problem, descriptor) = match variant {
        PencilVariant::Mu => (w.to_vec(), Problem::PencilMu, descriptor.to_string()),
        PencilVariant::Tmu => {
            (doubled_strip(&grid, w), Problem::PencilTmu, format!("{descriptor}, evenly extended across y = d"))
        }
    };
    let w = floored(&w)?;
    let stencil = g.stencil();
    let zeros = vec![0.0; g.len()];
    let none = vec![false; g.len()];
    solve_scalar(&stencil, &zeros, &w, &none, count, -1.0, problem, descriptor, None)
}

/// Pencil with weight `1 - |f|^2` for a minimizer `f` on a strip.
pub fn pencil_eigs(f: &Field2, variant: PencilVariant, count: usize) -> Result<EigenResult> {
    let grid = match f.grid() {
        Grid::Strip(g) => *g,
        _ => return Err(GlError::DimensionMismatch("pencil problems are posed on strips".into())),
    };
    pencil_eigs_with_weight(grid, &field_weight(f), variant, count, "1 - |u|^2 of the given field")
}

/// Result of the mixed problem on the half-strip.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lambda1 {
    pub eig: EigenResult,
    /// Rayleigh quotient of `d U / d y` on the half-strip, when a field is given.
    pub rayleigh_dy_u: Option<f64>,
}

fn half_strip_stencil(grid: &StripGrid) -> (Stencil, usize) {
    let c = (grid.ny - 1) / 2;
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x(i)).collect();
    let ys: Vec<f64> = (c..grid.ny).map(|j| grid.y(j)).collect();
    (Stencil::cartesian(&xs, &ys, [true, false]), c)
}

fn rayleigh(stencil: &Stencil, w: &[f64], psi: &[f64]) -> f64 {
    let mut num = 0.0;
    stencil.for_each_edge(|a, b, c| num += c * (psi[a] - psi[b]).powi(2));
    let den: f64 = psi.iter().zip(w).zip(&stencil.weights).map(|((p, w), q)| q * w * p * p).sum();
    num / den
}

/// Lowest eigenvalue of `-Laplace psi = lambda w psi` on `0 < y < d`, Dirichlet
/// at `y = d` and Neumann elsewhere, with `w` given on the full strip.
pub fn lambda_d1_with_weight(grid: StripGrid, w: &[f64], u1: Option<&[f64]>, descriptor: &str) -> Result<Lambda1> {
    check_weight(&Grid::Strip(grid), w)?;
    let (stencil, c) = half_strip_stencil(&grid);
    let nx = grid.nx;
    let half = |v: &[f64]| v[nx * c..].to_vec();
    let wh = floored(&half(w))?;
    let top = stencil.dims[1] - 1;
    let dirichlet: Vec<bool> = (0..stencil.len()).map(|n| n / nx == top).collect();
    let zeros = vec![0.0; stencil.len()];
    let eig = solve_scalar(
        &stencil,
        &zeros,
        &wh,
        &dirichlet,
        1,
        -1.0,
        Problem::Lambda1,
        format!("{descriptor} on 0 < y < d"),
        None,
    )?;
    let rayleigh_dy_u = u1.map(|u| {
        let ny = grid.ny;
        let mut psi = vec![0.0; stencil.len()];
        for jj in 0..=top {
            let j = c + jj;
            for i in 0..nx {
                // Central differences; the even reflection at y = d makes the last one zero.
                psi[i + nx * jj] =
                    if j + 1 < ny { (u[i + nx * (j + 1)] - u[i + nx * (j - 1)]) / (2.0 * grid.hy) } else { 0.0 };
            }
        }
        rayleigh(&stencil, &wh, &psi)
    });
    Ok(Lambda1 { eig, rayleigh_dy_u })
}

/// The mixed problem with the weight of a minimizer `f = (U, V)`, and the Rayleigh quotient of `d U / d y`.
pub fn lambda_d1(f: &Field2) -> Result<Lambda1> {
    let grid = match f.grid() {
        Grid::Strip(g) => *g,
        _ => return Err(GlError::DimensionMismatch("the mixed problem is posed on strips".into())),
    };
    let u1 = f.component(0);
    lambda_d1_with_weight(grid, &field_weight(f), Some(&u1), "1 - |u|^2 of the given field")
}

/// The lowest `count` eigenvalues of the separated problems
/// `-a'' + kappa^2 a = mu w(x) a` on the `x` nodes of `grid`, taken over the
/// discrete Neumann transverse eigenvalues `kappa^2`. For weights depending on
/// `x` alone these are exactly the eigenvalues of the strip pencil.
pub fn separated_pencil(grid: StripGrid, w_x: &[f64], count: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = (0..grid.nx).map(|i| grid.x(i)).collect();
    let stencil = Stencil::cartesian(&xs, &[0.0], [true, false]);
    let w = floored(w_x)?;
    let none = vec![false; grid.nx];
    let mut all = Vec::new();
    let m = (grid.ny - 1) as f64;
    for k in 0..grid.ny {
        let kappa2 = 2.0 * (1.0 - (std::f64::consts::PI * k as f64 / m).cos()) / (grid.hy * grid.hy);
        // Every eigenvalue of mode k is at least kappa^2 because w <= 1.
        if all.len() >= count && kappa2 >= all[count - 1] {
            break;
        }
        let diag: Vec<f64> = stencil.weights.iter().map(|q| kappa2 * q).collect();
        let r =
            solve_scalar(&stencil, &diag, &w, &none, count.min(grid.nx), -1.0, Problem::PencilMu, String::new(), None)?;
        all.extend(r.eigenvalues);
        all.sort_by(|a: &f64, b| a.partial_cmp(b).unwrap());
    }
    all.truncate(count);
    Ok(all)
}

/// Smallest eigenvalues of `phi -> sum |grad phi|^2 - (1 - |f|^2) phi^2` over
/// scalar `phi` vanishing on the clamped planes, within the first-component class of `s`.
pub fn stability_eigs(f: &Field2, s: SymmetryClass, count: usize) -> Result<EigenResult> {
    let grid = *f.grid();
    let stencil = grid.stencil();
    let w = field_weight(f);
    let diag: Vec<f64> = w.iter().zip(&stencil.weights).map(|(w, q)| -w * q).collect();
    let ones = vec![1.0; grid.len()];
    let dirichlet: Vec<bool> = (0..grid.len()).map(|n| grid.is_clamped(n)).collect();
    // Validate the class once so the projector below cannot fail.
    project_scalar_first(&grid, &mut vec![0.0; grid.len()], s)?;
    let project = |x: &mut [f64]| {
        project_scalar_first(&grid, x, s).expect("class checked");
    };
    let max_w = w.iter().cloned().fold(0.0f64, f64::max);
    let mut r = solve_scalar(
        &stencil,
        &diag,
        &ones,
        &dirichlet,
        count,
        -max_w - 0.5,
        Problem::FirstDirectionStability,
        format!("1 - |u|^2, first component of class {s}"),
        Some(&project),
    )?;
    r.nodal_counts =
        r.eigenfields.iter().map(|phi| nodal_domains_in_class(&grid, phi, s)).collect::<Result<Vec<_>>>()?;
    Ok(r)
}

/// The smallest first-direction eigenvalue; negative values mean instability.
pub fn stability_first_direction(f: &Field2, s: SymmetryClass) -> Result<EigenResult> {
    stability_eigs(f, s, 1)
}

/// Lowest Ritz values of the full Hessian of the discrete energy at `f`
/// (two components, clamped planes fixed), within class `s`, for the given shift.
pub fn hessian_ritz(f: &Field2, s: SymmetryClass, count: usize, shift: f64) -> Result<EigenResult> {
    let grid = *f.grid();
    let stencil = grid.stencil();
    let n = grid.len();
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if !grid.is_clamped(v) {
            index[v] = free.len();
            free.push(v);
        }
    }
    let nf = free.len();
    let mut trips = Vec::new();
    for (k, &v) in free.iter().enumerate() {
        let [a, b] = f.values()[v];
        let w = 1.0 - (a * a + b * b);
        let q = stencil.weights[v];
        trips.push((2 * k, 2 * k, q * (-w + 2.0 * a * a)));
        trips.push((2 * k + 1, 2 * k + 1, q * (-w + 2.0 * b * b)));
        trips.push((2 * k, 2 * k + 1, q * 2.0 * a * b));
    }
    stencil.for_each_edge(|a, b, c| {
        let (ia, ib) = (index[a], index[b]);
        for comp in 0..2 {
            if ia != usize::MAX {
                trips.push((2 * ia + comp, 2 * ia + comp, c));
            }
            if ib != usize::MAX {
                trips.push((2 * ib + comp, 2 * ib + comp, c));
            }
            if ia != usize::MAX && ib != usize::MAX {
                let (x, y) = (2 * ia.min(ib) + comp, 2 * ia.max(ib) + comp);
                trips.push((x, y, -c));
            }
        }
    });
    let k = CsrSym::from_triplets(2 * nf, &trips);
    let m: Vec<f64> = free.iter().flat_map(|&v| [stencil.weights[v]; 2]).collect();
    let order: Vec<usize> = band_order(grid.dims())
        .into_iter()
        .filter(|&v| index[v] != usize::MAX)
        .flat_map(|v| [2 * index[v], 2 * index[v] + 1])
        .collect();
    project_values(&grid, &mut vec![[0.0; 2]; n], s)?;
    let project = |x: &mut [f64]| {
        let mut full = vec![[0.0; 2]; n];
        for (kk, &v) in free.iter().enumerate() {
            full[v] = [x[2 * kk], x[2 * kk + 1]];
        }
        project_values(&grid, &mut full, s).expect("class checked");
        for (kk, &v) in free.iter().enumerate() {
            x[2 * kk] = full[v][0];
            x[2 * kk + 1] = full[v][1];
        }
    };
    let opts = EigenOptions { shift, ..EigenOptions::default() };
    let pairs = lowest_eigenpairs(&k, &m, &m, &order, count, &opts, Some(&project))?;
    let fields = pairs
        .vectors
        .iter()
        .map(|x| {
            let mut full = vec![0.0; 2 * n];
            for (kk, &v) in free.iter().enumerate() {
                full[2 * v] = x[2 * kk];
                full[2 * v + 1] = x[2 * kk + 1];
            }
            fix_sign(&mut full);
            full
        })
        .collect();
    Ok(EigenResult {
        problem: Problem::Hessian,
        clusters: clusters(&pairs.values, CLUSTER_WIDTH),
        eigenvalues: pairs.values,
        eigenfields: fields,
        dims: grid.dims(),
        residuals: pairs.residuals,
        weight_descriptor: format!("Hessian at the given field, class {s}, shift {shift}"),
        nodal_counts: Vec::new(),
    })
}

/// Number of negative Hessian directions in class `s`, required to agree at two shifts.
pub fn negative_directions(f: &Field2, s: SymmetryClass, count: usize) -> Result<usize> {
    let a = hessian_ritz(f, s, count, -1.5)?;
    let b = hessian_ritz(f, s, count, -2.5)?;
    let na = a.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    let nb = b.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    if na != nb {
        return Err(GlError::Eigen(format!("negative direction count differs between shifts: {na} vs {nb}")));
    }
    Ok(na)
}

/// Largest principal angle between `span(a)` and `span(b)` in the inner
/// product with diagonal weight `m`.
pub fn subspace_angle(a: &[Vec<f64>], b: &[Vec<f64>], m: &[f64]) -> f64 {
    let ortho = |vs: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for v in vs {
            let mut v = v.clone();
            for _ in 0..2 {
                for o in &out {
                    let c: f64 = v.iter().zip(o).zip(m).map(|((x, y), w)| x * y * w).sum();
                    v.iter_mut().zip(o).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nv: f64 = v.iter().zip(m).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
            if nv > 0.0 {
                v.iter_mut().for_each(|x| *x /= nv);
                out.push(v);
            }
        }
        out
    };
    let (qa, qb) = (ortho(a), ortho(b));
    let c = nalgebra::DMatrix::from_fn(qa.len(), qb.len(), |i, j| {
        qa[i].iter().zip(&qb[j]).zip(m).map(|((x, y), w)| x * y * w).sum::<f64>()
    });
    let smin = c.svd(false, false).singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    smin.clamp(-1.0, 1.0).acos()
}
