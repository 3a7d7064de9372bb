//! Tensor-product grids for the strip, the axisymmetric cylinder and the
//! fundamental sector of the cylinder cross-section.

use crate::error::{GlError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default node cap for sector grids.
pub const DEFAULT_SECTOR_CAP: usize = 250_000;

/// Default truncation half-length for a strip of half-width `d`.
pub fn default_length(d: f64) -> f64 {
    (8.0 * d).max(30.0)
}

/// Uniform grid on `[-L, L] x [-d, d]`, odd node counts in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub d: f64,
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl StripGrid {
    pub fn new(d: f64, l: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(GlError::InvalidGrid(format!("half-width d = {d} must be positive")));
        }
        if !(l >= 4.0 * d) || !l.is_finite() {
            return Err(GlError::InvalidGrid(format!("L = {l} must be at least 4d = {}", 4.0 * d)));
        }
        check_odd("nx", nx)?;
        check_odd("ny", ny)?;
        Ok(Self { d, l, nx, ny, hx: 2.0 * l / (nx - 1) as f64, hy: 2.0 * d / (ny - 1) as f64 })
    }

    /// Grid with the default truncation length.
    pub fn with_default_length(d: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(d, default_length(d), nx, ny)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.d + j as f64 * self.hy
    }
}

/// Axisymmetric grid on `[-L, L] x [0, d]` in `(x, r)`; the axis `r = 0` is a node line.
///
/// For the finite cylinder `L` is the physical half-length `R`; otherwise it
/// is a truncation length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiGrid {
    pub d: f64,
    pub l: f64,
    pub nx: usize,
    pub nr: usize,
    pub hx: f64,
    pub hr: f64,
}

impl AxiGrid {
    pub fn new(d: f64, l: f64, nx: usize, nr: usize) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(GlError::InvalidGrid(format!("radius d = {d} must be positive")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(GlError::InvalidGrid(format!("length L = {l} must be positive")));
        }
        check_odd("nx", nx)?;
        if nr < 3 {
            return Err(GlError::InvalidGrid(format!("nr = {nr} must be at least 3")));
        }
        Ok(Self { d, l, nx, nr, hx: 2.0 * l / (nx - 1) as f64, hr: d / (nr - 1) as f64 })
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.hx
    }

    pub fn r(&self, j: usize) -> f64 {
        j as f64 * self.hr
    }
}

/// Grid on `[-L, L]` times the sector `0 <= theta <= pi/(2 ell)` of the disk of radius `d`.
///
/// Radii are cell-centred, `rho_j = (j + 1/2) h_rho`, so the axis is never a node;
/// angles are node-centred so both sector edges carry nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorGrid3 {
    pub d: f64,
    pub l: f64,
    pub ell: u32,
    pub nx: usize,
    pub nrho: usize,
    pub ntheta: usize,
    pub hx: f64,
    pub hrho: f64,
    pub htheta: f64,
}

impl SectorGrid3 {
    pub fn new(d: f64, l: f64, ell: u32, nx: usize, nrho: usize, ntheta: usize) -> Result<Self> {
        Self::with_cap(d, l, ell, nx, nrho, ntheta, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(d: f64, l: f64, ell: u32, nx: usize, nrho: usize, ntheta: usize, cap: usize) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(GlError::InvalidGrid(format!("radius d = {d} must be positive")));
        }
        if !(l >= 4.0 * d) || !l.is_finite() {
            return Err(GlError::InvalidGrid(format!("L = {l} must be at least 4d = {}", 4.0 * d)));
        }
        if ell == 0 {
            return Err(GlError::InvalidGrid("sector index ell must be at least 1".into()));
        }
        check_odd("nx", nx)?;
        if nrho < 2 || ntheta < 2 {
            return Err(GlError::InvalidGrid("nrho and ntheta must be at least 2".into()));
        }
        let nodes = nx.saturating_mul(nrho).saturating_mul(ntheta);
        if nodes > cap {
            return Err(GlError::GridTooLarge { nodes, cap });
        }
        Ok(Self {
            d,
            l,
            ell,
            nx,
            nrho,
            ntheta,
            hx: 2.0 * l / (nx - 1) as f64,
            hrho: d / nrho as f64,
            htheta: PI / (2.0 * ell as f64) / (ntheta - 1) as f64,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.hx
    }

    pub fn rho(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hrho
    }

    pub fn theta(&self, k: usize) -> f64 {
        k as f64 * self.htheta
    }

    /// Number of copies of the fundamental sector that tile the full cross-section.
    pub fn sector_count(&self) -> f64 {
        4.0 * self.ell as f64
    }
}

fn check_odd(name: &str, n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(GlError::InvalidGrid(format!("{name} = {n} must be odd and at least 3")));
    }
    Ok(())
}

/// Any of the supported grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Strip(StripGrid),
    Axi(AxiGrid),
    Sector(SectorGrid3),
}

impl From<StripGrid> for Grid {
    fn from(g: StripGrid) -> Self {
        Grid::Strip(g)
    }
}
impl From<AxiGrid> for Grid {
    fn from(g: AxiGrid) -> Self {
        Grid::Axi(g)
    }
}
impl From<SectorGrid3> for Grid {
    fn from(g: SectorGrid3) -> Self {
        Grid::Sector(g)
    }
}

impl Grid {
    /// Node counts per axis, x first. Two-dimensional grids report `n2 = 1`.
    pub fn dims(&self) -> [usize; 3] {
        match self {
            Grid::Strip(g) => [g.nx, g.ny, 1],
            Grid::Axi(g) => [g.nx, g.nr, 1],
            Grid::Sector(g) => [g.nx, g.nrho, g.ntheta],
        }
    }

    pub fn len(&self) -> usize {
        let [a, b, c] = self.dims();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nx(&self) -> usize {
        self.dims()[0]
    }

    pub fn d(&self) -> f64 {
        match self {
            Grid::Strip(g) => g.d,
            Grid::Axi(g) => g.d,
            Grid::Sector(g) => g.d,
        }
    }

    pub fn l(&self) -> f64 {
        match self {
            Grid::Strip(g) => g.l,
            Grid::Axi(g) => g.l,
            Grid::Sector(g) => g.l,
        }
    }

    pub fn hx(&self) -> f64 {
        match self {
            Grid::Strip(g) => g.hx,
            Grid::Axi(g) => g.hx,
            Grid::Sector(g) => g.hx,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.l() + i as f64 * self.hx()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let [nx, n1, _] = self.dims();
        i + nx * (j + n1 * k)
    }

    pub fn split(&self, n: usize) -> (usize, usize, usize) {
        let [nx, n1, _] = self.dims();
        (n % nx, (n / nx) % n1, n / (nx * n1))
    }

    /// Cartesian position of a node. For the cylinder grids the transverse
    /// coordinates are `(r, 0)` or `(rho cos theta, rho sin theta)`.
    pub fn position(&self, n: usize) -> [f64; 3] {
        let (i, j, k) = self.split(n);
        match self {
            Grid::Strip(g) => [g.x(i), g.y(j), 0.0],
            Grid::Axi(g) => [g.x(i), g.r(j), 0.0],
            Grid::Sector(g) => {
                let (rho, th) = (g.rho(j), g.theta(k));
                [g.x(i), rho * th.cos(), rho * th.sin()]
            }
        }
    }

    /// Distance from the strip centre line or the cylinder axis.
    pub fn transverse_radius(&self, n: usize) -> f64 {
        let (_, j, _) = self.split(n);
        match self {
            Grid::Strip(g) => g.y(j).abs(),
            Grid::Axi(g) => g.r(j),
            Grid::Sector(g) => g.rho(j),
        }
    }

    /// Nodes on the planes `x = -L` and `x = L`, clamped to `(0, -1)` and `(0, 1)`.
    pub fn is_clamped(&self, n: usize) -> bool {
        let i = n % self.nx();
        i == 0 || i == self.nx() - 1
    }

    pub fn clamp_value(&self, n: usize) -> [f64; 2] {
        if n.is_multiple_of(self.nx()) {
            [0.0, -1.0]
        } else {
            [0.0, 1.0]
        }
    }

    /// Which axes carry a reflection that maps the grid onto itself.
    pub fn mirror_axes(&self) -> [bool; 3] {
        match self {
            Grid::Strip(_) => [true, true, false],
            Grid::Axi(_) | Grid::Sector(_) => [true, false, false],
        }
    }

    pub fn stencil(&self) -> Stencil {
        match self {
            Grid::Strip(g) => {
                let xs: Vec<f64> = (0..g.nx).map(|i| g.x(i)).collect();
                let ys: Vec<f64> = (0..g.ny).map(|j| g.y(j)).collect();
                Stencil::cartesian(&xs, &ys, [true, true])
            }
            Grid::Axi(g) => axi_stencil(g),
            Grid::Sector(g) => sector_stencil(g),
        }
    }

    /// Permutation of nodes ordering the longest axis slowest, which keeps the
    /// bandwidth of assembled operators near the transverse node count.
    pub fn band_order(&self) -> Vec<usize> {
        band_order(self.dims())
    }
}

/// Node order with axis 0 slowest and the transverse axes fastest.
pub fn band_order(dims: [usize; 3]) -> Vec<usize> {
    let [n0, n1, n2] = dims;
    let mut order = Vec::with_capacity(n0 * n1 * n2);
    for i in 0..n0 {
        for k in 0..n2 {
            for j in 0..n1 {
                order.push(i + n0 * (j + n1 * k));
            }
        }
    }
    order
}

/// Quadrature weights and edge conductances of a tensor-product grid.
///
/// The discrete Dirichlet energy is `sum_e c_e |u_a - u_b|^2 / 2` over the edges
/// of each axis, the potential is `sum_n q_n (1 - |u_n|^2)^2 / 4`.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub dims: [usize; 3],
    /// Node quadrature weights, including the measure factor of the geometry.
    pub weights: Vec<f64>,
    /// Edge conductances per axis; axis `a` has `dims[a] - 1` edges along it.
    pub conductance: [Vec<f64>; 3],
    pub mirror: [bool; 3],
}

impl Stencil {
    /// Trapezoid weights on a (possibly nonuniform) 2D tensor grid.
    pub fn cartesian(xs: &[f64], ys: &[f64], mirror: [bool; 2]) -> Self {
        let qx = trapezoid_weights(xs);
        let qy = trapezoid_weights(ys);
        let (nx, ny) = (xs.len(), ys.len());
        let mut weights = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                weights[i + nx * j] = qx[i] * qy[j];
            }
        }
        let mut cx = vec![0.0; nx.saturating_sub(1) * ny];
        for j in 0..ny {
            for i in 0..nx - 1 {
                cx[i + (nx - 1) * j] = qy[j] / (xs[i + 1] - xs[i]);
            }
        }
        let mut cy = vec![0.0; nx * ny.saturating_sub(1)];
        for j in 0..ny.saturating_sub(1) {
            for i in 0..nx {
                cy[i + nx * j] = qx[i] / (ys[j + 1] - ys[j]);
            }
        }
        Self { dims: [nx, ny, 1], weights, conductance: [cx, cy, Vec::new()], mirror: [mirror[0], mirror[1], false] }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Shape of the edge array along `axis`.
    pub fn edge_dims(&self, axis: usize) -> [usize; 3] {
        let mut e = self.dims;
        e[axis] = e[axis].saturating_sub(1);
        e
    }

    /// Calls `f(a, b, c)` for every edge between nodes `a` and `b` with conductance `c`.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize, f64)) {
        for axis in 0..3 {
            let [e0, e1, e2] = self.edge_dims(axis);
            if e0 * e1 * e2 == 0 {
                continue;
            }
            let c = &self.conductance[axis];
            let stride = match axis {
                0 => 1,
                1 => self.dims[0],
                _ => self.dims[0] * self.dims[1],
            };
            let mut e = 0;
            for k in 0..e2 {
                for j in 0..e1 {
                    for i in 0..e0 {
                        let a = self.node(i, j, k);
                        f(a, a + stride, c[e]);
                        e += 1;
                    }
                }
            }
        }
    }

    /// Stride between neighbouring nodes along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }
}

/// Trapezoid-rule weights for the nodes `xs`.
pub fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut q = vec![0.0; n];
    if n == 1 {
        q[0] = 1.0;
        return q;
    }
    for i in 0..n - 1 {
        let h = xs[i + 1] - xs[i];
        q[i] += 0.5 * h;
        q[i + 1] += 0.5 * h;
    }
    q
}

fn axi_stencil(g: &AxiGrid) -> Stencil {
    let (nx, nr) = (g.nx, g.nr);
    let xs: Vec<f64> = (0..nx).map(|i| g.x(i)).collect();
    let qx = trapezoid_weights(&xs);
    let h = g.hr;
    // Finite-volume r-weights: integral of r dr over each node's control interval.
    let mut qr = vec![0.0; nr];
    qr[0] = h * h / 8.0;
    for (j, q) in qr.iter_mut().enumerate().take(nr - 1).skip(1) {
        *q = g.r(j) * h;
    }
    qr[nr - 1] = 0.5 * h * (g.d - 0.25 * h);
    let tau = 2.0 * PI;
    let mut weights = vec![0.0; nx * nr];
    for j in 0..nr {
        for i in 0..nx {
            weights[i + nx * j] = tau * qx[i] * qr[j];
        }
    }
    let mut cx = vec![0.0; (nx - 1) * nr];
    for j in 0..nr {
        for i in 0..nx - 1 {
            cx[i + (nx - 1) * j] = tau * qr[j] / g.hx;
        }
    }
    let mut cr = vec![0.0; nx * (nr - 1)];
    for j in 0..nr - 1 {
        let rm = (j as f64 + 0.5) * h;
        for i in 0..nx {
            cr[i + nx * j] = tau * qx[i] * rm / h;
        }
    }
    Stencil { dims: [nx, nr, 1], weights, conductance: [cx, cr, Vec::new()], mirror: [true, false, false] }
}

fn sector_stencil(g: &SectorGrid3) -> Stencil {
    let (nx, nr, nt) = (g.nx, g.nrho, g.ntheta);
    let xs: Vec<f64> = (0..nx).map(|i| g.x(i)).collect();
    let qx = trapezoid_weights(&xs);
    let ths: Vec<f64> = (0..nt).map(|k| g.theta(k)).collect();
    let qt = trapezoid_weights(&ths);
    let h = g.hrho;
    let qr: Vec<f64> = (0..nr).map(|j| g.rho(j) * h).collect();
    let s = g.sector_count();
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + nr * k);
    let mut weights = vec![0.0; nx * nr * nt];
    for k in 0..nt {
        for j in 0..nr {
            for i in 0..nx {
                weights[idx(i, j, k)] = s * qx[i] * qr[j] * qt[k];
            }
        }
    }
    let mut cx = vec![0.0; (nx - 1) * nr * nt];
    for k in 0..nt {
        for j in 0..nr {
            for i in 0..nx - 1 {
                cx[i + (nx - 1) * (j + nr * k)] = s * qr[j] * qt[k] / g.hx;
            }
        }
    }
    let mut cr = vec![0.0; nx * (nr - 1) * nt];
    for k in 0..nt {
        for j in 0..nr - 1 {
            let rm = (j + 1) as f64 * h;
            for i in 0..nx {
                cr[i + nx * (j + (nr - 1) * k)] = s * qx[i] * qt[k] * rm / h;
            }
        }
    }
    let mut ct = vec![0.0; nx * nr * (nt - 1)];
    for k in 0..nt - 1 {
        for j in 0..nr {
            for i in 0..nx {
                ct[idx(i, j, k)] = s * qx[i] * (h / g.rho(j)) / g.htheta;
            }
        }
    }
    Stencil { dims: [nx, nr, nt], weights, conductance: [cx, cr, ct], mirror: [true, false, false] }
}

/// Compensated sum of an array laid out with shape `dims`, accumulated over
/// orbits of the coordinate reflections flagged in `mirror`, so that the result
/// is bitwise invariant under those reflections.
pub fn symmetric_sum(values: &[f64], dims: [usize; 3], mirror: [bool; 3]) -> f64 {
    let [n0, n1, n2] = dims;
    debug_assert_eq!(values.len(), n0 * n1 * n2);
    let half = |n: usize, m: bool| if m { n.div_ceil(2) } else { n };
    let (h0, h1, h2) = (half(n0, mirror[0]), half(n1, mirror[1]), half(n2, mirror[2]));
    let at = |i: usize, j: usize, k: usize| values[i + n0 * (j + n1 * k)];
    let mut acc = KahanSum::default();
    for k in 0..h2 {
        for j in 0..h1 {
            for i in 0..h0 {
                let fold0 = |j: usize, k: usize| {
                    let i2 = n0 - 1 - i;
                    if mirror[0] && i2 != i {
                        at(i, j, k) + at(i2, j, k)
                    } else {
                        at(i, j, k)
                    }
                };
                let fold1 = |k: usize| {
                    let j2 = n1 - 1 - j;
                    if mirror[1] && j2 != j {
                        fold0(j, k) + fold0(j2, k)
                    } else {
                        fold0(j, k)
                    }
                };
                let k2 = n2 - 1 - k;
                let v = if mirror[2] && k2 != k { fold1(k) + fold1(k2) } else { fold1(k) };
                acc.add(v);
            }
        }
    }
    acc.total()
}

/// Kahan–Babuška compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_grid_rejects_even_counts() {
        assert!(StripGrid::new(1.0, 30.0, 64, 33).is_err());
        assert!(StripGrid::new(1.0, 30.0, 65, 32).is_err());
        assert!(StripGrid::new(1.0, 3.0, 65, 33).is_err());
        let g = StripGrid::new(1.0, 30.0, 65, 33).unwrap();
        assert_eq!(g.x(32), 0.0);
        assert_eq!(g.y(16), 0.0);
    }

    #[test]
    fn sector_cap_enforced() {
        let e = SectorGrid3::with_cap(3.0, 20.0, 1, 101, 20, 10, 10_000).unwrap_err();
        assert!(matches!(e, GlError::GridTooLarge { .. }));
    }

    #[test]
    fn strip_weights_integrate_area() {
        let g = Grid::Strip(StripGrid::new(1.5, 30.0, 101, 21).unwrap());
        let s = g.stencil();
        let area: f64 = s.weights.iter().sum();
        assert!((area - 60.0 * 3.0).abs() < 1e-9);
    }

    #[test]
    fn axi_weights_integrate_volume() {
        let g = AxiGrid::new(2.0, 5.0, 11, 9).unwrap();
        let s = Grid::Axi(g).stencil();
        let vol: f64 = s.weights.iter().sum();
        assert!((vol - PI * 4.0 * 10.0).abs() < 1e-9);
    }

    #[test]
    fn sector_weights_integrate_volume() {
        let g = SectorGrid3::new(2.0, 8.0, 2, 11, 6, 5).unwrap();
        let s = Grid::Sector(g).stencil();
        let vol: f64 = s.weights.iter().sum();
        assert!((vol - PI * 4.0 * 16.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_sum_is_reflection_invariant() {
        let dims = [7, 5, 1];
        let v: Vec<f64> = (0..35).map(|n| ((n * 37 % 11) as f64 + 0.1) * 1.0e-3 * (n as f64).sin()).collect();
        let mut flipped = vec![0.0; 35];
        for j in 0..5 {
            for i in 0..7 {
                flipped[(6 - i) + 7 * (4 - j)] = v[i + 7 * j];
            }
        }
        let a = symmetric_sum(&v, dims, [true, true, false]);
        let b = symmetric_sum(&flipped, dims, [true, true, false]);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - v.iter().sum::<f64>()).abs() < 1e-15);
    }
}
