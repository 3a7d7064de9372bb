//! Mountain-pass paths between the phase-imprinted endpoint maps `psi_n^-` and
//! `psi_n^+`: explicit low-energy constructions, a string method with a
//! climbing image, and closed-form barrier bounds.

use crate::energy::energy;
use crate::error::{GlError, Result};
use crate::field::{project_values, Field2, SymmetryClass};
use crate::grid::Grid;
use crate::minimize::Flow;
use crate::spectral::{bessel_prime_zero, hessian_ritz, negative_directions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

pub const DEFAULT_IMAGES: usize = 33;
pub const DEFAULT_SUB_IMAGES: usize = 8;
pub const DEFAULT_DELTA: f64 = 0.02;
/// Largest barrier increase a reparametrization may cause before it is rejected.
pub const REPARAM_ALLOWANCE: f64 = 1e-10;

/// Odd quintic smoothstep: `C^2`, increasing, equal to `+-1` for `|s| >= 1`.
pub fn smoothstep(s: f64) -> f64 {
    if s >= 1.0 {
        1.0
    } else if s <= -1.0 {
        -1.0
    } else {
        let s2 = s * s;
        s * (15.0 - 10.0 * s2 + 3.0 * s2 * s2) / 8.0
    }
}

/// The phase profile `chi(x / n)` with `chi = (pi/2) smoothstep`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTemplate {
    pub n: f64,
}

impl PhaseTemplate {
    pub fn new(n: f64) -> Result<Self> {
        if !(n >= 1.0 && n.is_finite()) {
            return Err(GlError::InvalidArgument(format!("stretch n = {n} must be at least 1")));
        }
        Ok(Self { n })
    }

    pub fn chi(&self, x: f64) -> f64 {
        FRAC_PI_2 * smoothstep(x / self.n)
    }

    pub fn chi_prime(&self, x: f64) -> f64 {
        let s = x / self.n;
        if s.abs() >= 1.0 {
            0.0
        } else {
            FRAC_PI_2 * 15.0 * (1.0 - s * s).powi(2) / (8.0 * self.n)
        }
    }

    /// Continuum energy per unit cross-sectional measure, `5 pi^2 / (14 n)`.
    pub fn line_energy(&self) -> f64 {
        5.0 * PI * PI / (14.0 * self.n)
    }
}

/// `psi_n^-` and `psi_n^+`: `(+-cos chi(x/n), sin chi(x/n))`, independent of the cross-section.
pub fn make_endpoints(n: f64, grid: &Grid) -> Result<(Field2, Field2)> {
    let t = PhaseTemplate::new(n)?;
    let plus = Field2::from_fn(*grid, |p| {
        let c = t.chi(p[0]);
        [c.cos(), c.sin()]
    });
    Ok((plus.conjugate_branch(), plus))
}

#[derive(Clone, Debug)]
pub struct EndpointChoice {
    pub n: u32,
    pub minus: Field2,
    pub plus: Field2,
    pub energy: f64,
}

/// Smallest `n` in `{4, 8, 16, ...}` (with `n <= L`) whose endpoint energy is below `reference`.
pub fn select_n(grid: &Grid, reference: f64) -> Result<EndpointChoice> {
    let mut n = 4u32;
    while n as f64 <= grid.l() {
        let (minus, plus) = make_endpoints(n as f64, grid)?;
        let e = energy(&plus).total;
        if e < reference {
            return Ok(EndpointChoice { n, minus, plus, energy: e });
        }
        n *= 2;
    }
    Err(GlError::InvalidArgument(format!("no stretch n <= L = {} gives endpoint energy below {reference}", grid.l())))
}

/// A discrete path with fixed endpoints.
#[derive(Clone, Debug)]
pub struct PathState {
    pub images: Vec<Field2>,
    pub energies: Vec<f64>,
    pub barrier: f64,
    pub barrier_index: usize,
    /// Largest deviation of the image positions from equal arc length, relative to the total length.
    pub arc_residual: f64,
}

fn sub(a: &[[f64; 2]], b: &[[f64; 2]]) -> Vec<[f64; 2]> {
    a.iter().zip(b).map(|(x, y)| [x[0] - y[0], x[1] - y[1]]).collect()
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum()
}

fn distance(a: &Field2, b: &Field2) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sum::<f64>().sqrt()
}

impl PathState {
    pub fn new(images: Vec<Field2>) -> Result<Self> {
        if images.len() < 3 {
            return Err(GlError::InvalidArgument("a path needs at least 3 images".into()));
        }
        let grid = *images[0].grid();
        if images.iter().any(|f| *f.grid() != grid) {
            return Err(GlError::DimensionMismatch("path images live on different grids".into()));
        }
        let mut p = Self { images, energies: Vec::new(), barrier: 0.0, barrier_index: 0, arc_residual: 0.0 };
        p.refresh();
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.images[0].grid()
    }

    /// Recomputes energies, the barrier and the arc residual.
    pub fn refresh(&mut self) {
        self.energies = self.images.par_iter().map(|f| energy(f).total).collect();
        self.refresh_barrier();
    }

    fn refresh_barrier(&mut self) {
        let (idx, e) =
            self.energies
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, be), (i, &e)| if e > be { (i, e) } else { (bi, be) });
        self.barrier = e;
        self.barrier_index = idx;
        let s = self.arc_lengths();
        let total = *s.last().unwrap();
        let m = (s.len() - 1) as f64;
        self.arc_residual = if total > 0.0 {
            s.iter().enumerate().fold(0.0f64, |r, (i, &si)| r.max((si - total * i as f64 / m).abs())) / total
        } else {
            0.0
        };
    }

    /// Cumulative Euclidean node-vector distance along the path.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut s = vec![0.0];
        for w in self.images.windows(2) {
            s.push(s.last().unwrap() + distance(&w[0], &w[1]));
        }
        s
    }

    /// Piecewise-linear resampling to `m` images at equal arc length; endpoints are copied.
    pub fn reparametrized(&self, m: usize) -> Result<PathState> {
        if m < 3 {
            return Err(GlError::InvalidArgument("a path needs at least 3 images".into()));
        }
        let s = self.arc_lengths();
        let total = *s.last().unwrap();
        let last = self.len() - 1;
        let mut images = Vec::with_capacity(m);
        images.push(self.images[0].clone());
        let mut seg = 0;
        for k in 1..m - 1 {
            let target = total * k as f64 / (m - 1) as f64;
            while seg + 1 < last && s[seg + 1] < target {
                seg += 1;
            }
            let len = s[seg + 1] - s[seg];
            let t = if len > 0.0 { ((target - s[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (&self.images[seg], &self.images[seg + 1]);
            let values = a
                .values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])])
                .collect();
            images.push(Field2::new(*a.grid(), values, a.tag())?);
        }
        images.push(self.images[last].clone());
        PathState::new(images)
    }

    /// Unit central-difference tangent at an interior image.
    pub fn tangent(&self, i: usize) -> Vec<[f64; 2]> {
        let i = i.clamp(1, self.len() - 2);
        normalized(sub(self.images[i + 1].values(), self.images[i - 1].values()))
    }

    /// Tangent at the barrier with the energy-weighted upwinding of the climbing image.
    pub fn climbing_tangent(&self, i: usize) -> Vec<[f64; 2]> {
        let e = &self.energies;
        let fwd = normalized(sub(self.images[i + 1].values(), self.images[i].values()));
        let bwd = normalized(sub(self.images[i].values(), self.images[i - 1].values()));
        let (dp, dm) = (e[i + 1] - e[i], e[i - 1] - e[i]);
        let (wp, wm) = if dp > 0.0 && dm < 0.0 {
            (1.0, 0.0)
        } else if dp < 0.0 && dm > 0.0 {
            (0.0, 1.0)
        } else {
            let (big, small) = (dp.abs().max(dm.abs()), dp.abs().min(dm.abs()));
            if e[i + 1] > e[i - 1] {
                (big, small)
            } else {
                (small, big)
            }
        };
        normalized(fwd.iter().zip(&bwd).map(|(a, b)| [wp * a[0] + wm * b[0], wp * a[1] + wm * b[1]]).collect())
    }
}

fn remove_component(v: &mut [[f64; 2]], unit: &[[f64; 2]]) {
    let c = dot(v, unit);
    for (x, t) in v.iter_mut().zip(unit) {
        x[0] -= c * t[0];
        x[1] -= c * t[1];
    }
}

fn normalized(mut v: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let n = dot(&v, &v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            x[0] /= n;
            x[1] /= n;
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Through `u_s + t (A, 0)`.
    Soliton,
    /// Through the solitonic vortex, translated out of the strip.
    Vortex,
}

#[derive(Clone, Debug)]
pub struct ExplicitOptions {
    /// Endpoint stretch; chosen by [`select_n`] when absent.
    pub n: Option<u32>,
    /// Energy the endpoints must stay below; defaults to the energy of the centre.
    pub endpoint_reference: Option<f64>,
    /// Extent of the linear segment `u_s + t (A, 0)`.
    pub t1: f64,
    /// Amplitude of the transverse mode `A sin(pi y / 2d)` added at the centre of
    /// the soliton path; by default only above the strip threshold.
    pub tilt: Option<f64>,
    pub sub_images: usize,
    /// Budget as a fraction of the centre energy.
    pub delta: f64,
}

impl Default for ExplicitOptions {
    fn default() -> Self {
        Self {
            n: None,
            endpoint_reference: None,
            t1: 0.5,
            tilt: None,
            sub_images: DEFAULT_SUB_IMAGES,
            delta: DEFAULT_DELTA,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub images: usize,
    pub max_energy: f64,
}

#[derive(Clone, Debug)]
pub struct ExplicitPath {
    pub path: PathState,
    pub n: u32,
    pub reference: f64,
    pub budget: f64,
    /// Stages of the `u1 > 0` half, listed from the centre outwards.
    pub stages: Vec<StageReport>,
    pub centre_index: usize,
}

/// The even extension of `f` across both strip edges, translated by `m` rows.
pub fn shifted_even(f: &Field2, m: isize) -> Result<Field2> {
    let g = match f.grid() {
        Grid::Strip(g) => *g,
        _ => return Err(GlError::DimensionMismatch("translation needs a strip grid".into())),
    };
    let period = 2 * (g.ny as isize - 1);
    let mut values = vec![[0.0; 2]; f.len()];
    for j in 0..g.ny {
        let r = (j as isize - m).rem_euclid(period.max(1));
        let src = if r > g.ny as isize - 1 { period - r } else { r } as usize;
        for i in 0..g.nx {
            values[j * g.nx + i] = f.values()[src * g.nx + i];
        }
    }
    Field2::new(*f.grid(), values, f.tag())
}

/// `(u1, u2)(x, y) -> (-u1, u2)(x, -y)`: exchanges the two halves of an explicit path.
fn path_mirror(f: &Field2) -> Result<Field2> {
    let flip_y = matches!(f.grid(), Grid::Strip(_));
    Ok(f.reflected(false, flip_y, [-1.0, 1.0])?.with_tag(f.tag()))
}

/// Phase-template homotopy from `h` (with `u1 > 0` off the clamp) to `end`.
fn polar_stages(h: &Field2, n_tilde: f64, end: &Field2, n: f64, sub: usize) -> Result<Vec<(String, Vec<Field2>)>> {
    let grid = *h.grid();
    let (wide, narrow) = (PhaseTemplate::new(n_tilde)?, PhaseTemplate::new(n)?);
    let rho: Vec<f64> = h.values().iter().map(|v| v[0].hypot(v[1])).collect();
    let chi0: Vec<f64> = h.values().iter().map(|v| v[1].atan2(v[0])).collect();
    let xs: Vec<f64> = (0..grid.len()).map(|k| grid.position(k)[0]).collect();
    let build = |f: &dyn Fn(usize) -> (f64, f64)| -> Result<Field2> {
        let values = (0..grid.len())
            .map(|k| {
                let (r, c) = f(k);
                [r * c.cos(), r * c.sin()]
            })
            .collect();
        Field2::new(grid, values, h.tag())
    };
    let mut stages = Vec::new();
    let mut imgs = Vec::new();
    for k in 1..=sub {
        let t = k as f64 / sub as f64;
        imgs.push(build(&|q| (rho[q], (1.0 - t) * chi0[q] + t * wide.chi(xs[q])))?);
    }
    stages.push(("phase to wide template".to_string(), imgs));
    let mut imgs = Vec::new();
    for k in 1..=sub {
        let t = k as f64 / sub as f64;
        imgs.push(build(&|q| ((1.0 - t) * rho[q] + t, wide.chi(xs[q])))?);
    }
    stages.push(("modulus to one".to_string(), imgs));
    let mut imgs = Vec::new();
    for k in 1..sub {
        let t = k as f64 / sub as f64;
        imgs.push(build(&|q| (1.0, (1.0 - t) * wide.chi(xs[q]) + t * narrow.chi(xs[q])))?);
    }
    imgs.push(end.clone().with_tag(h.tag()));
    stages.push(("template to endpoint".to_string(), imgs));
    Ok(stages)
}

/// The explicit path of the given regime through `centre` (`u_s` or `u_d`).
///
/// Only the `u1 > 0` half is constructed; the other half is its mirror image,
/// so the path is symmetric and its central image has `u1` odd in `y`.
pub fn explicit_path(regime: Regime, centre: &Field2, opts: &ExplicitOptions) -> Result<ExplicitPath> {
    let grid = *centre.grid();
    let reference = energy(centre).total;
    let budget = reference * (1.0 + opts.delta);
    let sub = opts.sub_images.max(1);
    let choice = match opts.n {
        Some(n) => {
            let (minus, plus) = make_endpoints(n as f64, &grid)?;
            let e = energy(&plus).total;
            EndpointChoice { n, minus, plus, energy: e }
        }
        None => select_n(&grid, opts.endpoint_reference.unwrap_or(reference))?,
    };
    let n_tilde = grid.l().max(choice.n as f64);
    let tag = centre.tag();
    let mut stages: Vec<(String, Vec<Field2>)> = Vec::new();
    let mut mid = centre.clone();
    match regime {
        Regime::Soliton => {
            if !(opts.t1 > 0.0 && opts.t1 < 1.0) {
                return Err(GlError::InvalidArgument("t1 must lie in (0, 1)".into()));
            }
            let tilt = opts.tilt.unwrap_or(if grid.d() > crate::STRIP_THRESHOLD { 0.05 } else { 0.0 });
            let d = grid.d();
            let strip = matches!(grid, Grid::Strip(_));
            let at = |t: f64| -> Result<Field2> {
                let tau = tilt * (1.0 - (t / opts.t1).powi(2));
                let values = (0..grid.len())
                    .map(|k| {
                        let p = grid.position(k);
                        let a = 1.0 / (p[0] / SQRT_2).cosh();
                        let y = if strip { (PI * p[1] / (2.0 * d)).sin() } else { 0.0 };
                        let v = centre.values()[k];
                        [v[0] + t * a + tau * a * y, v[1]]
                    })
                    .collect();
                Field2::new(grid, values, tag)
            };
            mid = at(0.0)?;
            let imgs = (1..=sub).map(|k| at(opts.t1 * k as f64 / sub as f64)).collect::<Result<Vec<_>>>()?;
            stages.push(("linear soliton segment".to_string(), imgs));
        }
        Regime::Vortex => {
            let g = match grid {
                Grid::Strip(g) => g,
                _ => return Err(GlError::DimensionMismatch("the vortex path needs a strip grid".into())),
            };
            let half = (g.ny - 1) / 2;
            let mut shifts: Vec<usize> = (1..=sub).map(|k| (k * half + sub / 2) / sub).filter(|&m| m > 0).collect();
            shifts.dedup();
            // Moving up by d leaves the half where u1 >= 0 for the solitonic vortex of degree +1.
            let probe = shifted_even(centre, half as isize)?;
            let sign = if probe.values().iter().map(|v| v[0]).sum::<f64>() >= 0.0 { 1 } else { -1 };
            let imgs = shifts.iter().map(|&m| shifted_even(centre, sign * m as isize)).collect::<Result<Vec<_>>>()?;
            let exited = imgs.last().unwrap().clone();
            stages.push(("translation".to_string(), imgs));
            let fill = |alpha: f64| -> Result<Vec<Field2>> {
                (1..=sub)
                    .map(|k| {
                        let a = alpha * k as f64 / sub as f64;
                        let values = exited
                            .values()
                            .iter()
                            .map(|v| [v[0] + a * (1.0 - v[0] * v[0] - v[1] * v[1]).max(0.0).sqrt(), v[1]])
                            .collect();
                        Field2::new(grid, values, tag)
                    })
                    .collect()
            };
            let mut alpha = 1.0;
            let mut imgs = fill(alpha)?;
            while imgs.iter().any(|f| energy(f).total > budget) && alpha > 1e-3 {
                alpha *= 0.5;
                imgs = fill(alpha)?;
            }
            stages.push(("modulus fill".to_string(), imgs));
        }
    }
    let last = stages.last().unwrap().1.last().unwrap().clone();
    if last.values().iter().enumerate().any(|(k, v)| !grid.is_clamped(k) && v[0] <= 0.0) {
        return Err(GlError::PathBudget { stage: stages.last().unwrap().0.clone(), barrier: f64::NAN, budget });
    }
    stages.extend(polar_stages(&last, n_tilde, &choice.plus, choice.n as f64, sub)?);
    let mut reports = Vec::new();
    for (name, imgs) in &stages {
        let max_energy = imgs.par_iter().map(|f| energy(f).total).reduce(|| f64::NEG_INFINITY, f64::max);
        if max_energy > budget {
            return Err(GlError::PathBudget { stage: name.clone(), barrier: max_energy, budget });
        }
        reports.push(StageReport { stage: name.clone(), images: imgs.len(), max_energy });
    }
    let plus_half: Vec<Field2> = stages.into_iter().flat_map(|(_, v)| v).collect();
    let count = plus_half.len();
    let mut images: Vec<Field2> = Vec::with_capacity(2 * count + 1);
    for f in plus_half.iter().rev() {
        images.push(path_mirror(f)?);
    }
    *images.first_mut().unwrap() = choice.minus.clone().with_tag(tag);
    images.push(mid);
    images.extend(plus_half);
    let path = PathState::new(images)?;
    if path.barrier > budget {
        return Err(GlError::PathBudget { stage: "centre".into(), barrier: path.barrier, budget });
    }
    Ok(ExplicitPath { path, n: choice.n, reference, budget, stages: reports, centre_index: count })
}

/// Straight line from `a` to `b` with `m` images.
pub fn linear_path(a: &Field2, b: &Field2, m: usize) -> Result<PathState> {
    if m < 3 {
        return Err(GlError::InvalidArgument("a path needs at least 3 images".into()));
    }
    let mut images = vec![a.clone()];
    for k in 1..m - 1 {
        let t = k as f64 / (m - 1) as f64;
        let values = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])])
            .collect();
        images.push(Field2::new(*a.grid(), values, a.tag())?);
    }
    images.push(b.clone());
    PathState::new(images)
}

/// `minus -> centre - r a`, the half circle `centre + r (-cos th a + sin th b)`,
/// then `centre + r a -> plus`, each piece sampled with `sub` images.
pub fn circle_path(
    centre: &Field2,
    a: &Field2,
    b: &Field2,
    r: f64,
    minus: &Field2,
    plus: &Field2,
    sub: usize,
) -> Result<PathState> {
    let grid = *centre.grid();
    let sub = sub.max(2);
    let point = |th: f64| -> Result<Field2> {
        let (c, s) = (th.cos(), th.sin());
        let values = (0..grid.len())
            .map(|k| {
                let (u, x, y) = (centre.values()[k], a.values()[k], b.values()[k]);
                [u[0] + r * (-c * x[0] + s * y[0]), u[1] + r * (-c * x[1] + s * y[1])]
            })
            .collect();
        Field2::new(grid, values, centre.tag())
    };
    let start = point(0.0)?;
    let end = point(PI)?;
    let mut images = linear_path(minus, &start, sub + 1)?.images;
    for k in 1..2 * sub {
        images.push(point(PI * k as f64 / (2 * sub) as f64)?);
    }
    images.extend(linear_path(&end, plus, sub + 1)?.images);
    PathState::new(images)
}

#[derive(Clone, Debug)]
pub struct StringOptions {
    pub iters: usize,
    /// Initial step in the preconditioned metric.
    pub step: f64,
    /// Stop when every interior image has perpendicular residual (dual norm) below this.
    pub tol: f64,
    /// Stop when the barrier changed by less than `stall_tol * barrier` over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    /// Keep image `M - 1 - i` equal to the mirror of image `i` when the endpoints are mirror images.
    pub mirror: bool,
    /// Reject reparametrizations that raise the barrier; without this the
    /// barrier may rise while images are redistributed.
    pub monotone: bool,
}

impl Default for StringOptions {
    fn default() -> Self {
        Self { iters: 2000, step: 1.0, tol: 1e-7, stall_window: 100, stall_tol: 1e-9, mirror: true, monotone: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StringReport {
    pub iterations: usize,
    pub converged: bool,
    pub barrier_history: Vec<f64>,
    pub rejected_reparametrizations: usize,
    pub max_perpendicular_residual: f64,
}

/// One Armijo step on an image along `Pi P^{-1} Pi g`, with `Pi` the Euclidean
/// projection orthogonal to the tangent, so images do not slide along the path
/// to first order; returns the perpendicular residual before the step.
fn perpendicular_step(flow: &Flow, img: &mut Field2, tangent: &[[f64; 2]], alpha: &mut f64) -> Result<f64> {
    let u = img.values().to_vec();
    let mut g = flow.gradient(&u);
    remove_component(&mut g, tangent);
    let mut p = flow.precondition(&g);
    remove_component(&mut p, tangent);
    let gp = dot(&g, &p);
    let res = gp.max(0.0).sqrt();
    if !(gp > 1e-300) {
        return Ok(res);
    }
    let f = &flow.functional;
    for _ in 0..40 {
        let step: Vec<[f64; 2]> = p.iter().map(|v| [-*alpha * v[0], -*alpha * v[1]]).collect();
        let de = f.energy_difference(&u, &step);
        if de.is_finite() && de <= -1e-4 * *alpha * gp {
            let mut next: Vec<[f64; 2]> = u.iter().zip(&step).map(|(a, b)| [a[0] + b[0], a[1] + b[1]]).collect();
            flow.project(&mut next)?;
            if f.energy_difference(&u, &sub(&next, &u)) <= 0.0 {
                *img = Field2::new(*img.grid(), next, img.tag())?;
                *alpha = (*alpha * 1.3).min(4.0);
                return Ok(res);
            }
        }
        *alpha *= 0.5;
    }
    Ok(res)
}

/// Averages each image with the mirror of its partner; the centre becomes mirror-invariant.
fn symmetrize_path(images: &mut [Field2]) -> Result<()> {
    let m = images.len();
    for i in 1..m.div_ceil(2) {
        let j = m - 1 - i;
        let partner = path_mirror(&images[j])?;
        let values = images[i]
            .values()
            .iter()
            .zip(partner.values())
            .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
            .collect();
        images[i] = Field2::new(*images[i].grid(), values, images[i].tag())?;
        if j != i {
            images[j] = path_mirror(&images[i])?;
        }
    }
    Ok(())
}

/// Simplified string method: perpendicular descent of every interior image,
/// then equal-arc-length reparametrization unless it raises the barrier.
pub fn string_method(mut path: PathState, s: SymmetryClass, opts: &StringOptions) -> Result<(PathState, StringReport)> {
    let grid = *path.grid();
    let flow = Flow::new(grid, Some(s))?;
    let m = path.len();
    let ends = (path.images[0].clone(), path.images[m - 1].clone());
    for img in path.images[1..m - 1].iter_mut() {
        let mut v = img.values().to_vec();
        project_values(&grid, &mut v, s)?;
        *img = Field2::new(grid, v, Some(s))?;
    }
    let mirrored =
        opts.mirror && matches!(grid, Grid::Strip(_)) && path_mirror(&ends.0)? == ends.1.clone().with_tag(ends.0.tag());
    if mirrored {
        symmetrize_path(&mut path.images)?;
    }
    path.refresh();
    let mut alphas = vec![opts.step; m];
    let mut history = vec![path.barrier];
    let mut rejected = 0;
    let mut max_res = f64::INFINITY;
    let mut converged = false;
    let mut it = 0;
    while it < opts.iters {
        it += 1;
        let tangents: Vec<Vec<[f64; 2]>> = (1..m - 1).map(|i| path.tangent(i)).collect();
        let res: Vec<f64> = path.images[1..m - 1]
            .par_iter_mut()
            .zip(alphas[1..m - 1].par_iter_mut())
            .zip(tangents.par_iter())
            .map(|((img, a), t)| perpendicular_step(&flow, img, t, a))
            .collect::<Result<Vec<_>>>()?;
        max_res = res.iter().cloned().fold(0.0, f64::max);
        if mirrored {
            symmetrize_path(&mut path.images)?;
        }
        path.refresh();
        let before = path.barrier;
        let mut candidate = path.reparametrized(m)?;
        if opts.monotone && candidate.barrier > before + REPARAM_ALLOWANCE {
            let blended: Vec<Field2> = path
                .images
                .iter()
                .zip(&candidate.images)
                .map(|(a, b)| {
                    let v = a
                        .values()
                        .iter()
                        .zip(b.values())
                        .map(|(x, y)| [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])])
                        .collect();
                    Field2::new(grid, v, Some(s))
                })
                .collect::<Result<_>>()?;
            candidate = PathState::new(blended)?;
            candidate.images[0] = ends.0.clone();
            candidate.images[m - 1] = ends.1.clone();
            candidate.refresh();
        }
        if !opts.monotone || candidate.barrier <= before + REPARAM_ALLOWANCE {
            for img in candidate.images[1..m - 1].iter_mut() {
                let mut v = img.values().to_vec();
                project_values(&grid, &mut v, s)?;
                *img = Field2::new(grid, v, Some(s))?;
            }
            if mirrored {
                symmetrize_path(&mut candidate.images)?;
            }
            candidate.refresh();
            if !opts.monotone || candidate.barrier <= before + REPARAM_ALLOWANCE {
                path = candidate;
            } else {
                rejected += 1;
            }
        } else {
            rejected += 1;
        }
        history.push(path.barrier);
        if max_res <= opts.tol {
            converged = true;
            break;
        }
        let w = opts.stall_window;
        if w > 0 && history.len() > w {
            let old = history[history.len() - 1 - w];
            if (old - path.barrier).abs() <= opts.stall_tol * path.barrier.abs() {
                converged = true;
                break;
            }
        }
    }
    debug_assert!(path.images[0] == ends.0 && path.images[m - 1] == ends.1);
    let report = StringReport {
        iterations: it,
        converged,
        barrier_history: history,
        rejected_reparametrizations: rejected,
        max_perpendicular_residual: max_res,
    };
    Ok((path, report))
}

#[derive(Clone, Debug)]
pub struct ClimbOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step: f64,
    /// Iterations between recomputations of the lowest Hessian mode.
    pub mode_refresh: usize,
}

impl Default for ClimbOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 20_000, step: 1.0, mode_refresh: 500 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaddleReport {
    pub image_index: usize,
    pub image_energy: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Lowest two Hessian Ritz values in the symmetry class.
    pub ritz: Vec<f64>,
    pub negative_directions: usize,
    /// Sup distance between the saddle and the barrier image it started from.
    pub distance_from_image: f64,
}

/// Lowest Hessian mode at `u` as a node vector, normalized in the preconditioner metric.
fn min_mode(flow: &Flow, u: &Field2, s: SymmetryClass) -> Result<Vec<[f64; 2]>> {
    let e = hessian_ritz(u, s, 1, -1.5)?;
    let v: Vec<[f64; 2]> = e.eigenfields[0].chunks(2).map(|c| [c[0], c[1]]).collect();
    let n = flow.p_norm2(&v).sqrt();
    Ok(v.into_iter().map(|x| [x[0] / n, x[1] / n]).collect())
}

/// Refines the barrier image into a saddle: ascent along the unstable mode,
/// preconditioned descent in all other directions.
pub fn climbing_image(path: &PathState, s: SymmetryClass, opts: &ClimbOptions) -> Result<(Field2, SaddleReport)> {
    let i = path.barrier_index;
    if i == 0 || i + 1 == path.len() {
        return Err(GlError::InvalidArgument("tangent degeneracy: the barrier sits at an endpoint".into()));
    }
    let grid = *path.grid();
    let flow = Flow::new(grid, Some(s))?;
    let start = path.images[i].clone().with_tag(Some(s));
    let mut u = start.values().to_vec();
    let tangent = path.climbing_tangent(i);
    let tn = flow.p_norm2(&tangent).sqrt();
    let mut mode: Vec<[f64; 2]> = tangent.iter().map(|t| [t[0] / tn, t[1] / tn]).collect();
    let mut have_hessian_mode = false;
    let mut alpha = opts.step;
    let mut g = flow.gradient(&u);
    let mut residual = flow.residual_sup(&g);
    let mut best = residual;
    let mut since_best = 0;
    let mut it = 0;
    while residual > opts.tol {
        if it >= opts.max_iter {
            return Err(GlError::NotConverged { iterations: it, residual });
        }
        if (!have_hessian_mode && residual < 1e-2) || (it > 0 && it % opts.mode_refresh.max(1) == 0) {
            let cur = Field2::new(grid, u.clone(), Some(s))?;
            let fresh = min_mode(&flow, &cur, s)?;
            // Keep the orientation of the previous mode.
            let sign = if dot(&fresh, &mode) < 0.0 { -1.0 } else { 1.0 };
            mode = fresh.into_iter().map(|x| [sign * x[0], sign * x[1]]).collect();
            have_hessian_mode = true;
        }
        let p = flow.precondition(&g);
        let c = dot(&mode, &g);
        let mut next: Vec<[f64; 2]> = u
            .iter()
            .zip(&p)
            .zip(&mode)
            .map(|((x, q), v)| [x[0] - alpha * (q[0] - 2.0 * c * v[0]), x[1] - alpha * (q[1] - 2.0 * c * v[1])])
            .collect();
        flow.project(&mut next)?;
        let g_next = flow.gradient(&next);
        let r_next = flow.residual_sup(&g_next);
        if !r_next.is_finite() || r_next > 10.0 * residual {
            alpha *= 0.5;
            if alpha < 1e-8 {
                return Err(GlError::StepUnderflow { iteration: it, energy: flow.functional.energy(&u).total });
            }
            it += 1;
            continue;
        }
        u = next;
        g = g_next;
        residual = r_next;
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 200 {
                alpha *= 0.5;
                since_best = 0;
                best = residual;
            }
        }
        it += 1;
    }
    let field = Field2::new(grid, u, Some(s))?;
    let ritz = hessian_ritz(&field, s, 2, -1.5)?.eigenvalues;
    let neg = negative_directions(&field, s, 3)?;
    let report = SaddleReport {
        image_index: i,
        image_energy: path.energies[i],
        energy: energy(&field).total,
        residual,
        iterations: it,
        ritz,
        negative_directions: neg,
        distance_from_image: field.sup_distance(&start),
    };
    Ok((field, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    ThreeRadial,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Thresholds {
    /// `pi / sqrt 2`.
    pub strip: f64,
    /// `sqrt 2 j'_{1,1}`.
    pub cylinder: f64,
    /// `sqrt 2 j'_{0,1}`.
    pub cylinder_radial: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarrierBounds {
    pub d: f64,
    pub dimension: Dimension,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub upper_source: String,
    /// The upper bound is the barrier itself rather than a strict bound.
    pub upper_attained: bool,
    pub thresholds: Thresholds,
}

pub fn thresholds() -> Thresholds {
    let j11 = bessel_prime_zero(1).expect("tabulated order");
    let j01 = bessel_prime_zero(0).expect("tabulated order");
    Thresholds { strip: crate::STRIP_THRESHOLD, cylinder: SQRT_2 * j11, cylinder_radial: SQRT_2 * j01 }
}

/// Closed-form bounds on the mountain-pass energy. `vortex_energy` is the
/// computed `energy(u_d)`, the barrier for strips above the threshold.
pub fn barrier_bounds(d: f64, dim: Dimension, vortex_energy: Option<f64>) -> BarrierBounds {
    let th = thresholds();
    match dim {
        Dimension::Two => {
            let lower = Some((1.0f64 / 16.0).max(5.0 * SQRT_2 * d / 48.0));
            let (upper, source) = if d <= th.strip {
                (Some(4.0 * SQRT_2 * d / 3.0), "energy(u_s)")
            } else {
                (vortex_energy, "energy(u_d)")
            };
            BarrierBounds {
                d,
                dimension: dim,
                lower,
                upper,
                upper_source: source.into(),
                upper_attained: true,
                thresholds: th,
            }
        }
        Dimension::ThreeRadial => {
            let upper = Some(2.0 * SQRT_2 * PI * d * d / 3.0);
            BarrierBounds {
                d,
                dimension: dim,
                lower: None,
                upper,
                upper_source: "energy(u_s)".into(),
                upper_attained: d <= th.cylinder,
                thresholds: th,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroCrossing {
    pub index: usize,
    /// `int h_1(0, y) dy` at that image.
    pub value: f64,
    /// `h_y sup |h|` at that image.
    pub bound: f64,
    pub ok: bool,
}

/// Image whose first component has the smallest transverse mean on `x = 0`.
pub fn mean_zero_crossing(path: &PathState) -> Result<ZeroCrossing> {
    let g = match path.grid() {
        Grid::Strip(g) => *g,
        _ => return Err(GlError::DimensionMismatch("mean-zero crossing needs a strip grid".into())),
    };
    let i0 = (g.nx - 1) / 2;
    let mut best: Option<ZeroCrossing> = None;
    for (k, f) in path.images.iter().enumerate() {
        let value: f64 = (0..g.ny)
            .map(|j| {
                let w = if j == 0 || j + 1 == g.ny { 0.5 } else { 1.0 };
                w * g.hy * f.at(i0, j, 0)[0]
            })
            .sum();
        let bound = g.hy * f.sup_modulus();
        if best.as_ref().is_none_or(|b| value.abs() < b.value.abs()) {
            best = Some(ZeroCrossing { index: k, value, bound, ok: value.abs() <= bound });
        }
    }
    Ok(best.expect("paths have images"))
}

#[cfg(test)]
mod tests;
