//! Preconditioned gradient flow on the discrete energy.
//!
//! Steps are `-alpha P^{-1} g` with `P = K + M` the discrete `-Laplace + 1`
//! (Dirichlet at fixed nodes), `alpha` from the Barzilai–Borwein formula in the
//! `P` inner product, and Armijo backtracking on the exactly computed energy
//! change.

use crate::energy::Functional;
use crate::error::{GlError, Result};
use crate::field::{project_values, SymmetryClass};
use crate::grid::Grid;
use crate::linalg::{BandCholesky, CsrSym};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// Constant step in the preconditioned metric, halved until the energy decreases.
    FixedStep(f64),
    BarzilaiBorwein,
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step_rule: StepRule,
    /// Project onto `|u| <= 1` after every step.
    pub clamp_modulus: bool,
    /// Project onto `|u| <= 1` during this many initial steps regardless.
    pub clamp_warmup: usize,
    /// Keep every `history_stride`-th energy in the report.
    pub history_stride: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20_000,
            step_rule: StepRule::BarzilaiBorwein,
            clamp_modulus: false,
            clamp_warmup: 100,
            history_stride: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowReport {
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub energy: f64,
    /// Energies of accepted iterates, accumulated from exact differences.
    pub history: Vec<f64>,
}

type Values = Vec<[f64; 2]>;

/// Free nodes of one component with the factored preconditioner restricted to them.
struct ComponentSpace {
    free_index: Vec<usize>,
    free_nodes: Vec<usize>,
    matrix: CsrSym,
    chol: BandCholesky,
}

impl ComponentSpace {
    fn new(functional: &Functional, fixed: &[bool]) -> Result<Self> {
        let grid = functional.grid;
        let mut free_index = vec![usize::MAX; fixed.len()];
        let mut free_nodes = Vec::new();
        for (i, &f) in fixed.iter().enumerate() {
            if !f {
                free_index[i] = free_nodes.len();
                free_nodes.push(i);
            }
        }
        let mut trips = Vec::new();
        for (k, &node) in free_nodes.iter().enumerate() {
            trips.push((k, k, functional.stencil.weights[node]));
        }
        functional.stencil.for_each_edge(|a, b, c| {
            let (ia, ib) = (free_index[a], free_index[b]);
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
        let matrix = CsrSym::from_triplets(free_nodes.len(), &trips);
        let order: Vec<usize> =
            grid.band_order().into_iter().filter(|&v| free_index[v] != usize::MAX).map(|v| free_index[v]).collect();
        let chol = BandCholesky::factor(&matrix, &order)?;
        Ok(Self { free_index, free_nodes, matrix, chol })
    }
}

/// Nodes where the class forces `u1 = 0` without a reflected partner on the
/// grid: the far edge of a sector.
fn first_component_zeros(grid: &Grid, symmetry: Option<SymmetryClass>) -> Option<Vec<bool>> {
    match (symmetry, grid) {
        (Some(SymmetryClass::Sector3D(_)), Grid::Sector(g)) => {
            let edge = g.nx * g.nrho * (g.ntheta - 1);
            Some((0..grid.len()).map(|n| n >= edge).collect())
        }
        _ => None,
    }
}

/// The linear pieces of a flow problem that do not depend on the iterate.
pub struct Flow {
    pub functional: Functional,
    pub fixed: Vec<bool>,
    pub symmetry: Option<SymmetryClass>,
    /// Spaces of `u2` and, when constrained further, of `u1`.
    second: ComponentSpace,
    first: Option<ComponentSpace>,
}

impl Flow {
    /// Flow with the clamped planes fixed.
    pub fn new(grid: Grid, symmetry: Option<SymmetryClass>) -> Result<Self> {
        let fixed = (0..grid.len()).map(|n| grid.is_clamped(n)).collect();
        Self::with_fixed(grid, symmetry, fixed)
    }

    /// Flow with an arbitrary set of frozen nodes (must include the clamped planes).
    pub fn with_fixed(grid: Grid, symmetry: Option<SymmetryClass>, fixed: Vec<bool>) -> Result<Self> {
        let functional = Functional::new(grid);
        let second = ComponentSpace::new(&functional, &fixed)?;
        let first = match first_component_zeros(&grid, symmetry) {
            Some(z) => {
                let f: Vec<bool> = fixed.iter().zip(&z).map(|(a, b)| *a || *b).collect();
                Some(ComponentSpace::new(&functional, &f)?)
            }
            None => None,
        };
        Ok(Self { functional, fixed, symmetry, second, first })
    }

    fn space(&self, c: usize) -> &ComponentSpace {
        match (c, &self.first) {
            (0, Some(f)) => f,
            _ => &self.second,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.functional.grid
    }

    pub fn project(&self, u: &mut [[f64; 2]]) -> Result<()> {
        if let Some(s) = self.symmetry {
            project_values(&self.functional.grid, u, s)?;
        }
        Ok(())
    }

    /// `P^{-1} g` on free nodes, zero on fixed ones.
    pub fn precondition(&self, g: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; g.len()];
        for c in 0..2 {
            let sp = self.space(c);
            let mut buf: Vec<f64> = sp.free_nodes.iter().map(|&n| g[n][c]).collect();
            sp.chol.solve(&mut buf);
            for (k, &n) in sp.free_nodes.iter().enumerate() {
                out[n][c] = buf[k];
            }
        }
        out
    }

    /// `s^T P s`.
    pub fn p_norm2(&self, s: &[[f64; 2]]) -> f64 {
        (0..2)
            .map(|c| {
                let sp = self.space(c);
                let x: Vec<f64> = sp.free_nodes.iter().map(|&n| s[n][c]).collect();
                sp.matrix.quad(&x)
            })
            .sum()
    }

    /// Energy gradient with fixed entries zeroed.
    pub fn gradient(&self, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut g = vec![[0.0; 2]; u.len()];
        self.functional.gradient(u, &self.fixed, &mut g);
        if let Some(f) = &self.first {
            for (n, v) in g.iter_mut().enumerate() {
                if f.free_index[n] == usize::MAX {
                    v[0] = 0.0;
                }
            }
        }
        g
    }

    /// Sup-norm of the strong residual over free nodes.
    pub fn residual_sup(&self, g: &[[f64; 2]]) -> f64 {
        let w = &self.functional.stencil.weights;
        (0..2)
            .map(|c| self.space(c).free_nodes.iter().fold(0.0f64, |m, &n| m.max(g[n][c].abs() / w[n])))
            .fold(0.0, f64::max)
    }

    pub fn is_free(&self, n: usize) -> bool {
        self.second.free_index[n] != usize::MAX
    }

    /// Runs the flow from `u` (modified in place).
    pub fn run(&self, u: &mut Vec<[f64; 2]>, opts: &FlowOptions) -> Result<FlowReport> {
        self.project(u)?;
        let f = &self.functional;
        let mut energy = f.energy(u).total;
        let mut history = vec![energy];
        let mut g = self.gradient(u);
        // Previous iterate and gradient, for the Barzilai-Borwein step.
        let mut prev: Option<(Values, Values)> = None;
        let mut alpha = match opts.step_rule {
            StepRule::FixedStep(a) => a,
            StepRule::BarzilaiBorwein => 1.0,
        };
        let mut residual = self.residual_sup(&g);
        let stride = opts.history_stride.max(1);
        for it in 0..opts.max_iter {
            if residual <= opts.tol {
                return Ok(FlowReport { iterations: it, converged: true, residual, energy, history });
            }
            let mut p = self.precondition(&g);
            for v in p.iter_mut() {
                v[0] = -v[0];
                v[1] = -v[1];
            }
            let gp: f64 = g.iter().zip(&p).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).sum();
            if let (StepRule::BarzilaiBorwein, Some((s, y))) = (opts.step_rule, &prev) {
                let sy: f64 = s.iter().zip(y).map(|(a, b)| a[0] * b[0] + a[1] * b[1]).sum();
                let sps = self.p_norm2(s);
                if sy > 0.0 && sps > 0.0 {
                    alpha = (sps / sy).clamp(1e-6, 1e4);
                }
            } else if let StepRule::FixedStep(a) = opts.step_rule {
                alpha = a;
            }
            let mut step = vec![[0.0; 2]; u.len()];
            let mut accepted = false;
            for _ in 0..60 {
                for (s, v) in step.iter_mut().zip(&p) {
                    *s = [alpha * v[0], alpha * v[1]];
                }
                let de = f.energy_difference(u, &step);
                if de.is_finite() && de <= 1e-4 * alpha * gp {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                if residual <= 10.0 * opts.tol || gp.abs() < 1e-28 {
                    // Stationary to working precision.
                    return Ok(FlowReport {
                        iterations: it,
                        converged: residual <= opts.tol,
                        residual,
                        energy,
                        history,
                    });
                }
                return Err(GlError::StepUnderflow { iteration: it, energy });
            }
            let mut next: Vec<[f64; 2]> = u.iter().zip(&step).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();
            self.project(&mut next)?;
            if opts.clamp_modulus || it < opts.clamp_warmup {
                for (k, v) in next.iter_mut().enumerate() {
                    let m = v[0].hypot(v[1]);
                    if m > 1.0 && self.is_free(k) {
                        v[0] /= m;
                        v[1] /= m;
                    }
                }
            }
            let actual: Vec<[f64; 2]> = next.iter().zip(u.iter()).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect();
            let de = f.energy_difference(u, &actual);
            energy += de;
            if (it + 1) % stride == 0 {
                history.push(energy);
            }
            let g_next = self.gradient(&next);
            let y: Vec<[f64; 2]> = g_next.iter().zip(&g).map(|(a, b)| [a[0] - b[0], a[1] - b[1]]).collect();
            prev = Some((actual, y));
            *u = next;
            g = g_next;
            residual = self.residual_sup(&g);
        }
        let converged = residual <= opts.tol;
        Ok(FlowReport { iterations: opts.max_iter, converged, residual, energy, history })
    }
}
