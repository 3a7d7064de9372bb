//! Zeros, winding numbers, nodal domains and sign patterns of fields.

use crate::energy::{energy, EnergyBreakdown};
use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// An isolated zero located inside a grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub x: f64,
    pub y: f64,
    /// Lower-left node of the containing cell.
    pub cell: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Winding {
    pub degree: i64,
    /// Distance of the accumulated phase from the nearest multiple of `2 pi`, in turns.
    pub residue: f64,
    /// Smallest modulus met on the loop.
    pub loop_modulus: f64,
}

/// Flat diagnostic report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
    pub sup_modulus: f64,
    pub zeros: Vec<Zero>,
    pub windings: Vec<i64>,
    pub sign_pattern_ok: Option<bool>,
    pub nodal_count: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignPattern {
    /// `u = (U, V)` with `U < 0` above the centre line, `U > 0` below, `V` odd and increasing across `x = 0`.
    UVSign,
    /// Axisymmetric analogue: only `V` is constrained, plus `|u| < 1`.
    HatUVSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub ok: bool,
    pub violations: Vec<usize>,
}

/// Position of node `(i, j)` in the plane of a two-dimensional grid.
type PlanarPosition<'a> = Box<dyn Fn(usize, usize) -> (f64, f64) + 'a>;

fn planar(grid: &Grid) -> Result<(usize, usize, PlanarPosition<'_>)> {
    match grid {
        Grid::Strip(g) => Ok((g.nx, g.ny, Box::new(move |i, j| (g.x(i), g.y(j))))),
        Grid::Axi(g) => Ok((g.nx, g.nr, Box::new(move |i, j| (g.x(i), g.r(j))))),
        Grid::Sector(_) => Err(GlError::DimensionMismatch("planar diagnostic on a sector grid".into())),
    }
}

/// Zeros of `u` found by bilinear root finding in every cell where both
/// components change sign. Cells where a component vanishes identically are
/// skipped (such zeros are not isolated).
pub fn locate_zeros(f: &Field2) -> Result<Vec<Zero>> {
    let grid = f.grid();
    let (nx, ny, pos) = planar(grid)?;
    let scale = f.sup_norm().max(f64::MIN_POSITIVE);
    let v = f.values();
    let mut found: Vec<(Zero, f64)> = Vec::new();
    let (hx, hy) = {
        let (x0, y0) = pos(0, 0);
        let (x1, y1) = pos(1, 1);
        (x1 - x0, y1 - y0)
    };
    for j in 0..ny - 1 {
        for i in 1..nx - 2 {
            let c = [v[i + nx * j], v[i + 1 + nx * j], v[i + nx * (j + 1)], v[i + 1 + nx * (j + 1)]];
            let mut usable = true;
            for comp in 0..2 {
                let lo = c.iter().map(|p| p[comp]).fold(f64::INFINITY, f64::min);
                let hi = c.iter().map(|p| p[comp]).fold(f64::NEG_INFINITY, f64::max);
                let flat = hi - lo <= 1e-12 * scale && hi.abs() <= 1e-12 * scale;
                if lo > 0.0 || hi < 0.0 || flat {
                    usable = false;
                }
            }
            if !usable {
                continue;
            }
            if let Some((s, t, m)) = bilinear_root(&c) {
                let (x0, y0) = pos(i, j);
                let z = Zero { x: x0 + s * hx, y: y0 + t * hy, cell: (i, j) };
                found.push((z, m));
            }
        }
    }
    found.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut out: Vec<Zero> = Vec::new();
    let tol = 0.5 * hx.min(hy);
    for (z, _) in found {
        if out.iter().all(|o| (o.x - z.x).hypot(o.y - z.y) > tol) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Root of the bilinear interpolant of the four corner values `[00, 10, 01, 11]`
/// in the closed unit square, with the modulus there.
fn bilinear_root(c: &[[f64; 2]; 4]) -> Option<(f64, f64, f64)> {
    let eval = |s: f64, t: f64| -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            *o = c[0][k] * (1.0 - s) * (1.0 - t) + c[1][k] * s * (1.0 - t) + c[2][k] * (1.0 - s) * t + c[3][k] * s * t;
        }
        out
    };
    let mut best: Option<(f64, f64, f64)> = None;
    for &(s0, t0) in &[(0.5, 0.5), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
        let (mut s, mut t) = (s0, t0);
        for _ in 0..50 {
            let f = eval(s, t);
            let mut jac = [[0.0; 2]; 2];
            for k in 0..2 {
                jac[k][0] = (c[1][k] - c[0][k]) * (1.0 - t) + (c[3][k] - c[2][k]) * t;
                jac[k][1] = (c[2][k] - c[0][k]) * (1.0 - s) + (c[3][k] - c[1][k]) * s;
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let ds = (f[0] * jac[1][1] - f[1] * jac[0][1]) / det;
            let dt = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
            s -= ds;
            t -= dt;
            if ds.abs() + dt.abs() < 1e-15 {
                break;
            }
        }
        let eps = 1e-9;
        if (-eps..=1.0 + eps).contains(&s) && (-eps..=1.0 + eps).contains(&t) {
            let f = eval(s, t);
            let m = f[0].hypot(f[1]);
            let scale = c.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
            if m <= 1e-9 * scale.max(1e-300) && best.is_none_or(|b| m < b.2) {
                best = Some((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0), m));
            }
        }
    }
    best
}

/// Degree of `u` along a square loop of `radius` nodes around the node
/// nearest to `at`.
pub fn winding_number_with_radius(f: &Field2, at: (f64, f64), radius: usize) -> Result<Winding> {
    let grid = f.grid();
    let (nx, ny, pos) = planar(grid)?;
    let (x00, y00) = pos(0, 0);
    let (x11, y11) = pos(1, 1);
    let (hx, hy) = (x11 - x00, y11 - y00);
    let i0 = ((at.0 - x00) / hx).round();
    let j0 = ((at.1 - y00) / hy).round();
    let r = radius as f64;
    if i0 - r < 0.0 || j0 - r < 0.0 || i0 + r > (nx - 1) as f64 || j0 + r > (ny - 1) as f64 {
        return Err(GlError::InvalidArgument("winding loop leaves the grid".into()));
    }
    let (i0, j0) = (i0 as usize, j0 as usize);
    let mut lp: Vec<(usize, usize)> = Vec::new();
    for i in i0 - radius..i0 + radius {
        lp.push((i, j0 - radius));
    }
    for j in j0 - radius..j0 + radius {
        lp.push((i0 + radius, j));
    }
    for i in (i0 - radius + 1..=i0 + radius).rev() {
        lp.push((i, j0 + radius));
    }
    for j in (j0 - radius + 1..=j0 + radius).rev() {
        lp.push((i0 - radius, j));
    }
    let v = f.values();
    let mut min_mod = f64::INFINITY;
    let mut total = 0.0;
    for k in 0..lp.len() {
        let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
        let p = v[a.0 + nx * a.1];
        let q = v[b.0 + nx * b.1];
        min_mod = min_mod.min(p[0].hypot(p[1]));
        let mut dphi = q[1].atan2(q[0]) - p[1].atan2(p[0]);
        while dphi > PI {
            dphi -= 2.0 * PI;
        }
        while dphi < -PI {
            dphi += 2.0 * PI;
        }
        total += dphi;
    }
    if min_mod < 0.1 {
        return Err(GlError::ModulusTooSmall(min_mod));
    }
    let turns = total / (2.0 * PI);
    let degree = turns.round();
    Ok(Winding { degree: degree as i64, residue: (turns - degree).abs(), loop_modulus: min_mod })
}

/// Degree of `u` at a zero, using a loop of radius 4 nodes.
pub fn winding_number(f: &Field2, at: (f64, f64)) -> Result<Winding> {
    winding_number_with_radius(f, at, 4)
}

/// Number of connected components of `{phi > tau}` and `{phi < -tau}` with
/// `tau = 1e-8 max |phi|`, nearest-neighbour connectivity on a tensor grid.
pub fn nodal_domains_dims(phi: &[f64], dims: [usize; 3]) -> Result<usize> {
    let [n0, n1, n2] = dims;
    assert_eq!(phi.len(), n0 * n1 * n2);
    let max = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max > 0.0) {
        return Err(GlError::InvalidArgument("nodal domains of an all-zero field".into()));
    }
    let tau = 1e-8 * max;
    let sign = |v: f64| -> i8 {
        if v > tau {
            1
        } else if v < -tau {
            -1
        } else {
            0
        }
    };
    let mut label = vec![false; phi.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..phi.len() {
        let s = sign(phi[start]);
        if s == 0 || label[start] {
            continue;
        }
        count += 1;
        label[start] = true;
        stack.push(start);
        while let Some(n) = stack.pop() {
            let (i, j, k) = (n % n0, (n / n0) % n1, n / (n0 * n1));
            let mut nb = [usize::MAX; 6];
            if i > 0 {
                nb[0] = n - 1;
            }
            if i + 1 < n0 {
                nb[1] = n + 1;
            }
            if j > 0 {
                nb[2] = n - n0;
            }
            if j + 1 < n1 {
                nb[3] = n + n0;
            }
            if k > 0 {
                nb[4] = n - n0 * n1;
            }
            if k + 1 < n2 {
                nb[5] = n + n0 * n1;
            }
            for m in nb {
                if m != usize::MAX && !label[m] && sign(phi[m]) == s {
                    label[m] = true;
                    stack.push(m);
                }
            }
        }
    }
    Ok(count)
}

pub fn nodal_domains(grid: &Grid, phi: &[f64]) -> Result<usize> {
    if phi.len() != grid.len() {
        return Err(GlError::DimensionMismatch("scalar field length".into()));
    }
    nodal_domains_dims(phi, grid.dims())
}

/// Nodal domains of a first-component field of class `s`, counted on the
/// fundamental domain of the class (`x >= 0`, and for the strip classes with
/// an odd reflection in `y`, the lower half of the first substrip). Courant's
/// bound then applies with the index of the eigenvalue within the class.
pub fn nodal_domains_in_class(grid: &Grid, phi: &[f64], s: SymmetryClass) -> Result<usize> {
    if phi.len() != grid.len() {
        return Err(GlError::DimensionMismatch("scalar field length".into()));
    }
    let [nx, n1, n2] = grid.dims();
    let c = (nx - 1) / 2;
    let rows = match (grid, s.canonical()) {
        (Grid::Strip(_), SymmetryClass::Imparity) => (n1 - 1) / 2 + 1,
        (Grid::Strip(_), SymmetryClass::Substrip(k)) if k > 0 => (n1 - 1) / (2 * k as usize) + 1,
        _ => n1,
    };
    let mut sub = Vec::with_capacity((nx - c) * rows * n2);
    for k in 0..n2 {
        for j in 0..rows {
            for i in c..nx {
                sub.push(phi[i + nx * (j + n1 * k)]);
            }
        }
    }
    nodal_domains_dims(&sub, [nx - c, rows, n2])
}

/// Checks the sign structure of `f = (U, V)`; violations are node indices.
pub fn sign_pattern_check(f: &Field2, pattern: SignPattern) -> Result<SignCheck> {
    let grid = f.grid();
    let (nx, ny, _) = planar(grid)?;
    let v = f.values();
    let sup = f.sup_norm();
    let exact = 1e-10 * sup;
    let (cx, cy) = ((nx - 1) / 2, (ny - 1) / 2);
    let mut bad = Vec::new();
    for j in 0..ny {
        for i in 1..nx - 1 {
            let n = i + nx * j;
            let (u, w) = (v[n][0], v[n][1]);
            let mut ok = u * u + w * w < 1.0;
            ok &= match i.cmp(&cx) {
                std::cmp::Ordering::Greater => w > 0.0,
                std::cmp::Ordering::Less => w < 0.0,
                std::cmp::Ordering::Equal => w.abs() <= exact,
            };
            if pattern == SignPattern::UVSign {
                if !matches!(grid, Grid::Strip(_)) {
                    return Err(GlError::DimensionMismatch("UVSign needs a strip grid".into()));
                }
                ok &= match j.cmp(&cy) {
                    std::cmp::Ordering::Greater => u < 0.0,
                    std::cmp::Ordering::Less => u > 0.0,
                    std::cmp::Ordering::Equal => u.abs() <= exact,
                };
            }
            if !ok {
                bad.push(n);
            }
        }
    }
    Ok(SignCheck { ok: bad.is_empty(), violations: bad })
}

/// Whether the first component changes sign along the cross-section `x = 0`.
pub fn first_component_changes_sign_at_centre(f: &Field2) -> Result<bool> {
    let (nx, n1, _) = planar(f.grid())?;
    let c = (nx - 1) / 2;
    let sup = f.sup_norm();
    let col: Vec<f64> = (0..n1).map(|j| f.values()[c + nx * j][0]).collect();
    let pos = col.iter().any(|&u| u > 1e-8 * sup);
    let neg = col.iter().any(|&u| u < -1e-8 * sup);
    Ok(pos && neg)
}

/// Energy, zeros with their degrees, and optionally a sign-pattern verdict.
pub fn diagnose(f: &Field2, pattern: Option<SignPattern>) -> Result<Diagnostics> {
    let EnergyBreakdown { dirichlet, potential, total } = energy(f);
    let (zeros, windings) = match f.grid() {
        Grid::Sector(_) => (Vec::new(), Vec::new()),
        _ => {
            let zeros = locate_zeros(f)?;
            let windings = zeros.iter().filter_map(|z| winding_number(f, (z.x, z.y)).ok().map(|w| w.degree)).collect();
            (zeros, windings)
        }
    };
    let sign_pattern_ok = match pattern {
        Some(p) => Some(sign_pattern_check(f, p)?.ok),
        None => None,
    };
    let nodal_count = {
        let u1 = f.component(0);
        nodal_domains(f.grid(), &u1).ok()
    };
    Ok(Diagnostics {
        dirichlet,
        potential,
        total,
        sup_modulus: f.sup_modulus(),
        zeros,
        windings,
        sign_pattern_ok,
        nodal_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StripGrid;

    fn strip(d: f64, nx: usize, ny: usize) -> Grid {
        Grid::Strip(StripGrid::new(d, 30.0, nx, ny).unwrap())
    }

    #[test]
    fn synthetic_vortex_degree() {
        let g = strip(3.0, 601, 61);
        let f = Field2::from_fn(g, |p| {
            let r = p[0].hypot(p[1]).max(1e-12);
            let m = (r / 2f64.sqrt()).tanh();
            [-p[1] / r * m, p[0] / r * m]
        });
        let zeros = locate_zeros(&f).unwrap();
        assert_eq!(zeros.len(), 1);
        assert!(zeros[0].x.abs() < 1e-12 && zeros[0].y.abs() < 1e-12);
        let w = winding_number(&f, (0.0, 0.0)).unwrap();
        assert_eq!(w.degree, 1);
        let w = winding_number(&f.conjugate_branch(), (0.0, 0.0)).unwrap();
        assert_eq!(w.degree, -1);
    }

    #[test]
    fn winding_is_additive() {
        let g = strip(3.0, 801, 61);
        let (a, b) = (1.5, -1.5);
        let f = Field2::from_fn(g, |p| {
            let z1 = (p[0] - a, p[1]);
            let z2 = (p[0] - b, p[1]);
            let re = z1.0 * z2.0 - z1.1 * z2.1;
            let im = z1.0 * z2.1 + z1.1 * z2.0;
            let r = re.hypot(im).max(1e-12);
            let m = r.min(1.0);
            [re / r * m, im / r * m]
        });
        let w1 = winding_number(&f, (a, 0.0)).unwrap().degree;
        let w2 = winding_number(&f, (b, 0.0)).unwrap().degree;
        let big = winding_number_with_radius(&f, (0.0, 0.0), 30).unwrap().degree;
        assert_eq!(w1 + w2, big);
        assert_eq!(big, 2);
    }

    #[test]
    fn soliton_has_no_isolated_zero() {
        let g = strip(1.0, 201, 21);
        let f = Field2::from_fn(g, |p| [0.0, (p[0] / 2f64.sqrt()).tanh()]);
        assert!(locate_zeros(&f).unwrap().is_empty());
        assert!(matches!(winding_number(&f, (0.0, 0.0)), Err(GlError::ModulusTooSmall(_))));
        let check = sign_pattern_check(&f, SignPattern::UVSign).unwrap();
        assert!(!check.ok);
    }

    #[test]
    fn nodal_counts() {
        let g = strip(2.0, 41, 21);
        let one = vec![1.0; g.len()];
        assert_eq!(nodal_domains(&g, &one).unwrap(), 1);
        let s: Vec<f64> = (0..g.len()).map(|n| (PI * g.position(n)[1] / 4.0).sin()).collect();
        assert_eq!(nodal_domains(&g, &s).unwrap(), 2);
        assert!(nodal_domains(&g, &vec![0.0; g.len()]).is_err());
    }
}
