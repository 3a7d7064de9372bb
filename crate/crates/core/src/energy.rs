//! Discrete Ginzburg–Landau energy, its exact gradient and second variation.

use crate::error::{GlError, Result};
use crate::field::Field2;
use crate::grid::{symmetric_sum, Grid, KahanSum, Stencil};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
}

/// The discrete functional on a fixed grid, with its stencil cached.
#[derive(Clone, Debug)]
pub struct Functional {
    pub grid: Grid,
    pub stencil: Stencil,
}

impl Functional {
    pub fn new(grid: Grid) -> Self {
        Self { grid, stencil: grid.stencil() }
    }

    pub fn len(&self) -> usize {
        self.stencil.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stencil.is_empty()
    }

    /// Energy with each sum accumulated over reflection orbits.
    pub fn energy(&self, u: &[[f64; 2]]) -> EnergyBreakdown {
        let s = &self.stencil;
        let pot: Vec<f64> = u
            .iter()
            .zip(&s.weights)
            .map(|(v, q)| {
                let a = 1.0 - (v[0] * v[0] + v[1] * v[1]);
                0.25 * q * a * a
            })
            .collect();
        let potential = symmetric_sum(&pot, s.dims, s.mirror);
        let mut dirichlet = 0.0;
        for axis in 0..3 {
            let ed = s.edge_dims(axis);
            if ed[0] * ed[1] * ed[2] == 0 {
                continue;
            }
            let stride = s.stride(axis);
            let c = &s.conductance[axis];
            let mut terms = Vec::with_capacity(c.len());
            for k in 0..ed[2] {
                for j in 0..ed[1] {
                    for i in 0..ed[0] {
                        let a = s.node(i, j, k);
                        let e = terms.len();
                        let (p, q) = (u[a], u[a + stride]);
                        let (d0, d1) = (q[0] - p[0], q[1] - p[1]);
                        terms.push(0.5 * c[e] * (d0 * d0 + d1 * d1));
                    }
                }
            }
            dirichlet += symmetric_sum(&terms, ed, s.mirror);
        }
        EnergyBreakdown { dirichlet, potential, total: dirichlet + potential }
    }

    /// Exact gradient of the discrete energy; entries at `fixed` nodes are zero.
    pub fn gradient(&self, u: &[[f64; 2]], fixed: &[bool], g: &mut [[f64; 2]]) {
        let s = &self.stencil;
        for ((gn, v), q) in g.iter_mut().zip(u).zip(&s.weights) {
            let a = 1.0 - (v[0] * v[0] + v[1] * v[1]);
            *gn = [-q * a * v[0], -q * a * v[1]];
        }
        s.for_each_edge(|a, b, c| {
            let d0 = c * (u[a][0] - u[b][0]);
            let d1 = c * (u[a][1] - u[b][1]);
            g[a][0] += d0;
            g[a][1] += d1;
            g[b][0] -= d0;
            g[b][1] -= d1;
        });
        for (gn, &f) in g.iter_mut().zip(fixed) {
            if f {
                *gn = [0.0, 0.0];
            }
        }
    }

    /// `E(u + step) - E(u)` computed from local differences, accurate relative
    /// to the difference itself rather than to the total energy.
    pub fn energy_difference(&self, u: &[[f64; 2]], step: &[[f64; 2]]) -> f64 {
        let s = &self.stencil;
        let mut acc = KahanSum::default();
        for ((v, p), q) in u.iter().zip(step).zip(&s.weights) {
            if p[0] == 0.0 && p[1] == 0.0 {
                continue;
            }
            let a = 1.0 - (v[0] * v[0] + v[1] * v[1]);
            let da = -(2.0 * (v[0] * p[0] + v[1] * p[1]) + p[0] * p[0] + p[1] * p[1]);
            acc.add(0.25 * q * da * (2.0 * a + da));
        }
        s.for_each_edge(|a, b, c| {
            let (sa, sb) = (step[a], step[b]);
            let e0 = sb[0] - sa[0];
            let e1 = sb[1] - sa[1];
            if e0 == 0.0 && e1 == 0.0 {
                return;
            }
            let d0 = u[b][0] - u[a][0];
            let d1 = u[b][1] - u[a][1];
            acc.add(c * (d0 * e0 + d1 * e1 + 0.5 * (e0 * e0 + e1 * e1)));
        });
        acc.total()
    }

    /// `sum |grad w|^2 - (1 - |f|^2)|w|^2 + 2 (f . w)^2`, the second derivative of the energy along `w`.
    pub fn second_variation(&self, f: &[[f64; 2]], w: &[[f64; 2]]) -> f64 {
        let s = &self.stencil;
        let mut acc = KahanSum::default();
        for ((u, v), q) in f.iter().zip(w).zip(&s.weights) {
            let a = 1.0 - (u[0] * u[0] + u[1] * u[1]);
            let fw = u[0] * v[0] + u[1] * v[1];
            acc.add(q * (-a * (v[0] * v[0] + v[1] * v[1]) + 2.0 * fw * fw));
        }
        s.for_each_edge(|a, b, c| {
            let d0 = w[b][0] - w[a][0];
            let d1 = w[b][1] - w[a][1];
            acc.add(c * (d0 * d0 + d1 * d1));
        });
        acc.total()
    }

    /// Gradient divided by the quadrature weight: the strong-form residual
    /// `-Laplace u - (1 - |u|^2) u`, zero at clamped nodes.
    pub fn residual(&self, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let fixed: Vec<bool> = (0..u.len()).map(|n| self.grid.is_clamped(n)).collect();
        let mut g = vec![[0.0; 2]; u.len()];
        self.gradient(u, &fixed, &mut g);
        for (gn, q) in g.iter_mut().zip(&self.stencil.weights) {
            gn[0] /= q;
            gn[1] /= q;
        }
        g
    }

    /// Quadrature-weighted inner product.
    pub fn inner(&self, a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        let mut acc = KahanSum::default();
        for ((x, y), q) in a.iter().zip(b).zip(&self.stencil.weights) {
            acc.add(q * (x[0] * y[0] + x[1] * y[1]));
        }
        acc.total()
    }
}

pub fn energy(f: &Field2) -> EnergyBreakdown {
    Functional::new(*f.grid()).energy(f.values())
}

pub fn el_residual(f: &Field2) -> Field2 {
    let r = Functional::new(*f.grid()).residual(f.values());
    Field2::direction(*f.grid(), r).expect("same grid")
}

/// Largest residual entry over all nodes.
pub fn residual_sup(f: &Field2) -> f64 {
    el_residual(f).sup_norm()
}

pub fn second_variation(f: &Field2, w: &Field2) -> Result<f64> {
    if f.grid() != w.grid() {
        return Err(GlError::DimensionMismatch("second variation fields live on different grids".into()));
    }
    Ok(Functional::new(*f.grid()).second_variation(f.values(), w.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StripGrid;

    fn strip(d: f64, nx: usize, ny: usize) -> Grid {
        Grid::Strip(StripGrid::new(d, 30.0, nx, ny).unwrap())
    }

    #[test]
    fn constant_minimum_has_zero_energy() {
        let grid = strip(1.0, 41, 9);
        let g = Field2::direction(grid, vec![[0.0, 1.0]; grid.len()]).unwrap();
        assert_eq!(energy(&g).total, 0.0);
        assert_eq!(el_residual(&g).sup_norm(), 0.0);
    }

    #[test]
    fn residual_of_constant_half() {
        let grid = strip(1.0, 21, 5);
        let f = Field2::constant(grid, [0.0, 0.5]);
        let r = el_residual(&f);
        for n in 0..f.len() {
            let (i, _, _) = grid.split(n);
            if i > 1 && i < 19 {
                assert!((r.values()[n][1] + 0.375).abs() < 1e-14);
                assert_eq!(r.values()[n][0], 0.0);
            }
        }
    }

    #[test]
    fn energy_difference_matches_totals() {
        let grid = strip(1.0, 31, 7);
        let f = Field2::from_fn(grid, |p| [0.3 * (p[1]).sin(), (p[0] / 2f64.sqrt()).tanh()]);
        let step: Vec<[f64; 2]> = (0..f.len()).map(|n| [1e-2 * (n as f64).sin(), 1e-2 * (n as f64).cos()]).collect();
        let fun = Functional::new(grid);
        let moved: Vec<[f64; 2]> = f.values().iter().zip(&step).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();
        let direct = fun.energy(&moved).total - fun.energy(f.values()).total;
        let local = fun.energy_difference(f.values(), &step);
        assert!((direct - local).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn total_is_exact_sum() {
        let grid = strip(1.0, 31, 7);
        let f = Field2::from_fn(grid, |p| [0.1 * p[1], (p[0]).tanh()]);
        let e = energy(&f);
        assert_eq!(e.total, e.dirichlet + e.potential);
        assert!(e.dirichlet >= 0.0 && e.potential >= 0.0);
    }
}
