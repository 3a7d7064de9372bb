//! Two-component fields on a grid and their symmetry classes.

use crate::error::{GlError, Result};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// Reflection symmetries a field may be required to satisfy.
///
/// Every class includes the imprinting relations `u1(-x,.) = u1(x,.)`,
/// `u2(-x,.) = -u2(x,.)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    PhaseImprintOnly,
    /// Additionally `u(-x,-y) = -u(x,y)`.
    Imparity,
    /// The strip split into `k` substrips; `u1` even about substrip boundaries
    /// and odd about their centre lines, `u2` even about both.
    Substrip(u32),
    /// Sector of angle `pi/(2 ell)`: `u1` vanishes on the far sector edge.
    Sector3D(u32),
    /// Invariant under rotations of the cross-section.
    Radial3D,
}

impl SymmetryClass {
    /// One-byte code used by the field file format.
    pub fn code(&self) -> u8 {
        match *self {
            SymmetryClass::PhaseImprintOnly => 1,
            SymmetryClass::Imparity => 2,
            SymmetryClass::Radial3D => 3,
            SymmetryClass::Substrip(k) => 0x40 + k.min(63) as u8,
            SymmetryClass::Sector3D(l) => 0x80 + l.min(127) as u8,
        }
    }

    /// Inverse of [`SymmetryClass::code`]; `0` means untagged.
    pub fn from_code(code: u8) -> Result<Option<Self>> {
        Ok(match code {
            0 => None,
            1 => Some(SymmetryClass::PhaseImprintOnly),
            2 => Some(SymmetryClass::Imparity),
            3 => Some(SymmetryClass::Radial3D),
            0x41..=0x7f => Some(SymmetryClass::Substrip((code - 0x40) as u32)),
            0x81..=0xff => Some(SymmetryClass::Sector3D((code - 0x80) as u32)),
            _ => return Err(GlError::BadFormat(format!("unknown symmetry code {code}"))),
        })
    }

    /// Substrip(1) and Imparity denote the same class.
    pub fn canonical(self) -> Self {
        match self {
            SymmetryClass::Substrip(1) => SymmetryClass::Imparity,
            s => s,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let num = |p: &str| -> Result<u32> {
            t[p.len()..]
                .trim_matches(|c| c == '(' || c == ')' || c == ':' || c == '=')
                .parse::<u32>()
                .map_err(|_| GlError::InvalidArgument(format!("bad symmetry class '{s}'")))
        };
        match t.as_str() {
            "phaseimprintonly" | "imprint" | "imprinting" | "none" => Ok(SymmetryClass::PhaseImprintOnly),
            "imparity" | "odd" => Ok(SymmetryClass::Imparity),
            "radial3d" | "radial" => Ok(SymmetryClass::Radial3D),
            _ if t.starts_with("substrip") => Ok(SymmetryClass::Substrip(num("substrip")?)),
            _ if t.starts_with("sector3d") => Ok(SymmetryClass::Sector3D(num("sector3d")?)),
            _ if t.starts_with("sector") => Ok(SymmetryClass::Sector3D(num("sector")?)),
            _ => Err(GlError::InvalidArgument(format!("unknown symmetry class '{s}'"))),
        }
    }
}

impl std::fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryClass::PhaseImprintOnly => write!(f, "PhaseImprintOnly"),
            SymmetryClass::Imparity => write!(f, "Imparity"),
            SymmetryClass::Substrip(k) => write!(f, "Substrip({k})"),
            SymmetryClass::Sector3D(l) => write!(f, "Sector3D({l})"),
            SymmetryClass::Radial3D => write!(f, "Radial3D"),
        }
    }
}

/// A map from grid nodes to the plane, stored x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2 {
    grid: Grid,
    values: Vec<[f64; 2]>,
    tag: Option<SymmetryClass>,
}

impl Field2 {
    /// Wraps values, validating finiteness and length; clamp nodes are overwritten.
    pub fn new(grid: Grid, mut values: Vec<[f64; 2]>, tag: Option<SymmetryClass>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GlError::DimensionMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(n) = values.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(GlError::InvalidArgument(format!("non-finite value at node {n}")));
        }
        apply_clamp(&grid, &mut values);
        Ok(Self { grid, values, tag })
    }

    /// Samples `f(x, transverse...)` at every node position.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 2]) -> Self {
        let mut values: Vec<[f64; 2]> = (0..grid.len()).map(|n| f(grid.position(n))).collect();
        apply_clamp(&grid, &mut values);
        Self { grid, values, tag: None }
    }

    /// Builds a field without clamping; used for perturbation directions that vanish on the clamp.
    pub fn direction(grid: Grid, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GlError::DimensionMismatch("direction length".into()));
        }
        Ok(Self { grid, values, tag: None })
    }

    pub fn constant(grid: Grid, v: [f64; 2]) -> Self {
        Self::from_fn(grid, |_| v)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [[f64; 2]] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<[f64; 2]> {
        self.values
    }

    pub fn tag(&self) -> Option<SymmetryClass> {
        self.tag
    }

    pub fn with_tag(mut self, tag: Option<SymmetryClass>) -> Self {
        self.tag = tag;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v[0].abs()).max(v[1].abs()))
    }

    pub fn sup_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v[0].hypot(v[1])))
    }

    /// Largest nodewise difference in either component.
    pub fn sup_distance(&self, other: &Field2) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs()))
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    /// `self + t * w` nodewise (no re-clamping).
    pub fn axpy(&self, t: f64, w: &Field2) -> Field2 {
        let values = self.values.iter().zip(&w.values).map(|(a, b)| [a[0] + t * b[0], a[1] + t * b[1]]).collect();
        Field2 { grid: self.grid, values, tag: None }
    }

    /// `(u1, u2) -> (-u1, u2)`, exchanging the two branches of an odd minimizer.
    pub fn conjugate_branch(&self) -> Field2 {
        let values = self.values.iter().map(|v| [-v[0], v[1]]).collect();
        Field2 { grid: self.grid, values, tag: self.tag }
    }

    /// Applies a coordinate reflection (x and/or the transverse strip coordinate)
    /// combined with component signs.
    pub fn reflected(&self, flip_x: bool, flip_y: bool, sign: [f64; 2]) -> Result<Field2> {
        let [nx, n1, n2] = self.grid.dims();
        if flip_y && !matches!(self.grid, Grid::Strip(_)) {
            return Err(GlError::DimensionMismatch("transverse reflection needs a strip grid".into()));
        }
        let mut values = vec![[0.0; 2]; self.len()];
        for k in 0..n2 {
            for j in 0..n1 {
                for i in 0..nx {
                    let si = if flip_x { nx - 1 - i } else { i };
                    let sj = if flip_y { n1 - 1 - j } else { j };
                    let v = self.values[self.grid.index(si, sj, k)];
                    values[self.grid.index(i, j, k)] = [sign[0] * v[0], sign[1] * v[1]];
                }
            }
        }
        Ok(Field2 { grid: self.grid, values, tag: None })
    }

    pub fn is_clamp_exact(&self) -> bool {
        (0..self.len()).filter(|&n| self.grid.is_clamped(n)).all(|n| self.values[n] == self.grid.clamp_value(n))
    }

    /// Value at `(i, j, k)`.
    pub fn at(&self, i: usize, j: usize, k: usize) -> [f64; 2] {
        self.values[self.grid.index(i, j, k)]
    }
}

pub(crate) fn apply_clamp(grid: &Grid, values: &mut [[f64; 2]]) {
    let [nx, n1, n2] = grid.dims();
    for jk in 0..n1 * n2 {
        values[nx * jk] = [0.0, -1.0];
        values[nx * jk + nx - 1] = [0.0, 1.0];
    }
}

/// One orbit-folding of an axis: each index maps to a representative and a
/// sign for each component; representatives flagged in `zero` force the
/// corresponding component to vanish.
#[derive(Clone, Debug)]
struct AxisFold {
    rep: Vec<usize>,
    sign: Vec<[f64; 2]>,
    nrep: usize,
    zero: Vec<[bool; 2]>,
}

impl AxisFold {
    /// Reflection about the centre node: `u1` even, `u2` odd.
    fn imprint_x(nx: usize) -> Self {
        let c = (nx - 1) / 2;
        let mut rep = vec![0; nx];
        let mut sign = vec![[1.0, 1.0]; nx];
        for i in 0..nx {
            rep[i] = i.abs_diff(c);
            if i < c {
                sign[i] = [1.0, -1.0];
            }
        }
        let mut zero = vec![[false, false]; c + 1];
        zero[0] = [false, true];
        Self { rep, sign, nrep: c + 1, zero }
    }

    /// Folding of the strip into half-substrips of `m` intervals: boundaries
    /// (multiples of `2m`) are even planes, centre lines (odd multiples of `m`)
    /// are odd planes for `u1`, so the sign pattern has period `4m`.
    fn substrip_y(ny: usize, k: usize) -> Result<Self> {
        if k == 0 || !(ny - 1).is_multiple_of(2 * k) {
            return Err(GlError::DimensionMismatch(format!("ny - 1 = {} not divisible by 2k = {}", ny - 1, 2 * k)));
        }
        let m = (ny - 1) / (2 * k);
        let mut rep = vec![0; ny];
        let mut sign = vec![[1.0, 1.0]; ny];
        for j in 0..ny {
            let t = j % (4 * m);
            let (r, s) = match t / m {
                0 => (t, 1.0),
                1 => (2 * m - t, -1.0),
                2 => (t - 2 * m, -1.0),
                _ => (4 * m - t, 1.0),
            };
            rep[j] = r;
            sign[j] = [s, 1.0];
        }
        let mut zero = vec![[false, false]; m + 1];
        zero[m] = [true, false];
        Ok(Self { rep, sign, nrep: m + 1, zero })
    }
}

/// For each transverse node index of a strip with `k` substrips, the
/// representative index in the first half-substrip and the sign of `u1`.
pub fn substrip_fold(ny: usize, k: u32) -> Result<Vec<(usize, f64)>> {
    let f = AxisFold::substrip_y(ny, k as usize)?;
    Ok(f.rep.iter().zip(&f.sign).map(|(&r, s)| (r, s[0])).collect())
}

/// Averages `values` over the orbits of `fold` acting on `axis`.
fn fold_average(values: &mut [[f64; 2]], dims: [usize; 3], axis: usize, fold: &AxisFold) {
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let n_axis = dims[axis];
    let lines: Vec<usize> = (0..dims[0] * dims[1] * dims[2]).filter(|&n| (n / stride) % n_axis == 0).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); fold.nrep];
    for t in 0..n_axis {
        members[fold.rep[t]].push(t);
    }
    for base in lines {
        for (r, list) in members.iter().enumerate() {
            for c in 0..2 {
                if fold.zero[r][c] {
                    for &t in list {
                        values[base + t * stride][c] = 0.0;
                    }
                    continue;
                }
                let first = fold.sign[list[0]][c] * values[base + list[0] * stride][c];
                let mut agree = true;
                let mut sum = 0.0;
                for &t in list {
                    let v = fold.sign[t][c] * values[base + t * stride][c];
                    agree &= v == first;
                    sum += v;
                }
                let avg = if agree { first } else { sum / list.len() as f64 };
                for &t in list {
                    values[base + t * stride][c] = fold.sign[t][c] * avg;
                }
            }
        }
    }
}

fn check_compat(grid: &Grid, s: SymmetryClass) -> Result<()> {
    let ok = match (s, grid) {
        (SymmetryClass::PhaseImprintOnly, _) => true,
        (SymmetryClass::Imparity | SymmetryClass::Substrip(_), Grid::Strip(_)) => true,
        (SymmetryClass::Radial3D, Grid::Axi(_)) => true,
        (SymmetryClass::Sector3D(l), Grid::Sector(g)) => {
            if l != g.ell {
                return Err(GlError::DimensionMismatch(format!("class Sector3D({l}) on a grid with ell = {}", g.ell)));
            }
            true
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(GlError::DimensionMismatch(format!("class {s} is incompatible with this grid")))
    }
}

/// Projects raw node values onto class `s` in place.
pub(crate) fn project_values(grid: &Grid, values: &mut [[f64; 2]], s: SymmetryClass) -> Result<()> {
    check_compat(grid, s)?;
    let dims = grid.dims();
    fold_average(values, dims, 0, &AxisFold::imprint_x(dims[0]));
    match s.canonical() {
        SymmetryClass::Imparity => fold_average(values, dims, 1, &AxisFold::substrip_y(dims[1], 1)?),
        SymmetryClass::Substrip(k) => fold_average(values, dims, 1, &AxisFold::substrip_y(dims[1], k as usize)?),
        SymmetryClass::Sector3D(_) => {
            let [nx, nr, nt] = dims;
            for j in 0..nr {
                for i in 0..nx {
                    values[i + nx * (j + nr * (nt - 1))][0] = 0.0;
                }
            }
        }
        _ => {}
    }
    Ok(())
}

/// Orthogonal projection of `f` onto the fields satisfying `s`; the result is tagged `s`.
pub fn project_symmetry(f: &Field2, s: SymmetryClass) -> Result<Field2> {
    let mut values = f.values.clone();
    project_values(&f.grid, &mut values, s)?;
    Ok(Field2 { grid: f.grid, values, tag: Some(s) })
}

/// Sup-norm distance between `f` and its projection, relative to the sup-norm of `f`.
pub fn symmetry_residual(f: &Field2, s: SymmetryClass) -> Result<f64> {
    let p = project_symmetry(f, s)?;
    let norm = f.sup_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(f.sup_distance(&p) / norm)
}

/// Projects a scalar field (a first-component perturbation) onto the class,
/// using the symmetry of `u1`.
pub fn project_scalar_first(grid: &Grid, phi: &mut [f64], s: SymmetryClass) -> Result<()> {
    let mut v: Vec<[f64; 2]> = phi.iter().map(|&p| [p, 0.0]).collect();
    project_values(grid, &mut v, s)?;
    for (p, w) in phi.iter_mut().zip(&v) {
        *p = w[0];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StripGrid;

    fn strip(d: f64, nx: usize, ny: usize) -> Grid {
        Grid::Strip(StripGrid::new(d, 30.0_f64.max(4.0 * d), nx, ny).unwrap())
    }

    fn pseudo_random(grid: Grid) -> Field2 {
        Field2::from_fn(grid, |p| {
            let a = (p[0] * 12.9898 + p[1] * 78.233).sin() * 43758.5453;
            let b = (p[0] * 39.346 + p[1] * 11.135).sin() * 24634.6345;
            [a.fract(), b.fract()]
        })
    }

    #[test]
    fn imparity_forces_origin_zero() {
        let g = strip(1.0, 21, 9);
        let f = project_symmetry(&pseudo_random(g), SymmetryClass::Imparity).unwrap();
        assert_eq!(f.at(10, 4, 0), [0.0, 0.0]);
    }

    #[test]
    fn projection_is_idempotent_bitwise() {
        let g = strip(1.5, 31, 13);
        for s in [SymmetryClass::PhaseImprintOnly, SymmetryClass::Imparity, SymmetryClass::Substrip(3)] {
            let p = project_symmetry(&pseudo_random(g), s).unwrap();
            let q = project_symmetry(&p, s).unwrap();
            assert_eq!(p.values(), q.values());
            assert!(symmetry_residual(&p, s).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn substrip_one_equals_imparity() {
        let g = strip(1.0, 21, 9);
        let f = pseudo_random(g);
        let a = project_symmetry(&f, SymmetryClass::Imparity).unwrap();
        let b = project_symmetry(&f, SymmetryClass::Substrip(1)).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn substrip_divisibility_checked() {
        let g = strip(1.0, 21, 9);
        assert!(project_symmetry(&pseudo_random(g), SymmetryClass::Substrip(3)).is_err());
        assert!(project_symmetry(&pseudo_random(g), SymmetryClass::Radial3D).is_err());
    }

    #[test]
    fn substrip_centre_lines_vanish() {
        let g = strip(2.0, 21, 13);
        let p = project_symmetry(&pseudo_random(g), SymmetryClass::Substrip(2)).unwrap();
        for i in 1..20 {
            assert_eq!(p.at(i, 3, 0)[0], 0.0);
            assert_eq!(p.at(i, 9, 0)[0], 0.0);
            // even about the interior substrip boundary y = 0
            assert_eq!(p.at(i, 5, 0), p.at(i, 7, 0));
        }
    }

    #[test]
    fn symmetry_codes_round_trip() {
        for s in [
            SymmetryClass::PhaseImprintOnly,
            SymmetryClass::Imparity,
            SymmetryClass::Radial3D,
            SymmetryClass::Substrip(4),
            SymmetryClass::Sector3D(2),
        ] {
            assert_eq!(SymmetryClass::from_code(s.code()).unwrap(), Some(s));
            assert_eq!(SymmetryClass::parse(&s.to_string()).unwrap(), s);
        }
    }
}
