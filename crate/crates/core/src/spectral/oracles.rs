//! Closed-form reference values: Bessel-derivative zeros, the Legendre
//! spectrum of the `sech^2` pencil, and Neumann eigenvalues of the unit disk.

use super::{clusters, EigenResult, Problem, CLUSTER_WIDTH};
use crate::diagnostics::nodal_domains_dims;
use crate::error::{GlError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// `J_n(x)` by its ascending series.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let z = 0.5 * x;
    let mut term = (0..n).fold(1.0, |t, k| t * z / (k + 1) as f64);
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -z * z / (m * (m + n as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && m > z {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum
}

/// `J_n'(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2`, with `J_0' = -J_1`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// The smallest positive zero of `J_l'`, for `l <= 8`.
pub fn bessel_prime_zero(l: u32) -> Result<f64> {
    if l > 8 {
        return Err(GlError::InvalidArgument(format!("order {l} outside the supported range 0..=8")));
    }
    let f = |x: f64| bessel_j_prime(l, x);
    let step = 0.01;
    let mut a = 0.1;
    let fa0 = f(a);
    let mut b = a + step;
    while f(b).signum() == fa0.signum() {
        a = b;
        b += step;
        if b > 15.0 {
            return Err(GlError::Bracket(format!("no sign change of J_{l}' below 15")));
        }
    }
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// The first `n` values `l (l + 1) / 2`, each repeated `l + 1` times as it
/// occurs for the `sech^2` pencil on a strip at the critical width.
pub fn legendre_spectrum(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut l = 0u32;
    while out.len() < n {
        for _ in 0..=l {
            if out.len() < n {
                out.push(0.5 * (l * (l + 1)) as f64);
            }
        }
        l += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendreReport {
    /// Nearest value `l (l + 1) / 2` for each eigenvalue.
    pub matched: Vec<f64>,
    pub degrees: Vec<u32>,
    pub max_deviation: f64,
    /// Sizes of the runs of equal matched degree.
    pub multiplicities: Vec<usize>,
    /// Deviation within tolerance and every complete run of the expected size `l + 1`.
    pub ok: bool,
}

/// Matches eigenvalues to the Legendre values `l (l + 1) / 2`.
pub fn legendre_check(eigs: &[f64], tol: f64) -> LegendreReport {
    let mut matched = Vec::new();
    let mut degrees = Vec::new();
    let mut max_deviation = 0.0f64;
    for &e in eigs {
        // Solve l (l + 1) / 2 = e for the nearest integer l >= 0.
        let guess = ((0.25 + 2.0 * e.max(0.0)).sqrt() - 0.5).round().max(0.0) as u32;
        let best = (guess.saturating_sub(1)..=guess + 1)
            .min_by(|&a, &b| {
                let va = (0.5 * (a * (a + 1)) as f64 - e).abs();
                let vb = (0.5 * (b * (b + 1)) as f64 - e).abs();
                va.partial_cmp(&vb).unwrap()
            })
            .unwrap();
        let v = 0.5 * (best * (best + 1)) as f64;
        max_deviation = max_deviation.max((v - e).abs());
        matched.push(v);
        degrees.push(best);
    }
    let mut multiplicities: Vec<usize> = Vec::new();
    let mut runs: Vec<u32> = Vec::new();
    for &l in &degrees {
        if runs.last() == Some(&l) {
            *multiplicities.last_mut().unwrap() += 1;
        } else {
            runs.push(l);
            multiplicities.push(1);
        }
    }
    let complete = runs.len().saturating_sub(1);
    let pattern_ok = runs.iter().enumerate().all(|(i, &l)| i == 0 || l == runs[i - 1] + 1)
        && runs.first().is_none_or(|&l| l == 0)
        && (0..complete).all(|i| multiplicities[i] == runs[i] as usize + 1)
        && multiplicities.last().is_none_or(|&m| m <= *runs.last().unwrap() as usize + 1);
    LegendreReport { matched, degrees, max_deviation, multiplicities, ok: max_deviation <= tol && pattern_ok }
}

/// Angular symmetry classes of functions on the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiskClass {
    /// Functions of `r` alone.
    Radial,
    /// `cos(m theta)` factors with `m` an odd multiple of `l`: even about `theta = 0`,
    /// odd about `theta = pi / (2 l)`.
    Ell(u32),
}

impl DiskClass {
    fn angular_indices(self) -> Box<dyn Iterator<Item = u32>> {
        match self {
            DiskClass::Radial => Box::new(std::iter::once(0)),
            DiskClass::Ell(l) => Box::new((0..).map(move |p| (2 * p + 1) * l)),
        }
    }
}

/// Radial finite-volume operator for angular index `m` on `n` cells:
/// diagonal and off-diagonal of the symmetrized matrix, and the mass.
fn radial_operator(m: u32, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = 1.0 / n as f64;
    let r: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let mass: Vec<f64> = r.iter().map(|r| r * h).collect();
    // Face conductance r_face / h between cells i and i + 1; zero flux at r = 0 and r = 1.
    let cond: Vec<f64> = (0..n - 1).map(|i| (i + 1) as f64).collect();
    let mm = (m as f64) * (m as f64);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { cond[i - 1] } else { 0.0 };
            let right = if i + 1 < n { cond[i] } else { 0.0 };
            (left + right + mm * h / r[i]) / mass[i]
        })
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -cond[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    (diag, off, mass)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        d = diag[i] - x - if i > 0 { e2 / d } else { 0.0 };
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solves `(T - x) y = b` for a symmetric tridiagonal `T`.
fn tridiagonal_solve(diag: &[f64], off: &[f64], x: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut piv = diag[0] - x;
    for i in 0..n {
        if i > 0 {
            piv = diag[i] - x - off[i - 1] * c[i - 1];
        }
        if piv == 0.0 {
            piv = 1e-300;
        }
        if i + 1 < n {
            c[i] = off[i] / piv;
        }
        y[i] = (b[i] - if i > 0 { off[i - 1] * y[i - 1] } else { 0.0 }) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// The `k`-th smallest eigenvalue (from zero) by bisection on the Sturm count.
fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> (f64, f64) {
    let mut hi = (0..diag.len())
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i < off.len() { off[i].abs() } else { 0.0 };
            diag[i] + l + r
        })
        .fold(0.0f64, f64::max);
    let mut lo = (0..diag.len())
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i < off.len() { off[i].abs() } else { 0.0 };
            diag[i] - l - r
        })
        .fold(f64::INFINITY, f64::min)
        .min(0.0)
        - 1e-12;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi), hi - lo)
}

/// Neumann eigenvalues of `-Laplace` on the unit disk within an angular class,
/// from a polar finite-volume discretization with `n_radial` cells.
///
/// Eigenfields are the radial profiles, normalized with weight `r dr`.
pub fn disk_neumann_eigs(count: usize, class: DiskClass, n_radial: usize) -> Result<EigenResult> {
    if n_radial < 8 || count == 0 {
        return Err(GlError::InvalidArgument("disk solver needs at least 8 cells and one eigenvalue".into()));
    }
    let mut modes: Vec<(f64, f64, u32, usize)> = Vec::new();
    let mut used = Vec::new();
    for m in class.angular_indices() {
        let mm = (m as f64) * (m as f64);
        // Every eigenvalue of index m is at least m^2.
        if modes.len() >= count && mm >= modes[count - 1].0 {
            break;
        }
        if m > 200 {
            return Err(GlError::Eigen("angular index search did not terminate".into()));
        }
        used.push(m);
        let (diag, off, _) = radial_operator(m, n_radial);
        for k in 0..count.min(n_radial) {
            let (v, width) = kth_eigenvalue(&diag, &off, k);
            modes.push((v, width, m, k));
        }
        modes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    modes.truncate(count);
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    let mut fields = Vec::new();
    let mut nodal = Vec::new();
    for &(v, _, m, _) in &modes {
        let (diag, off, mass) = radial_operator(m, n_radial);
        let mut y = vec![1.0; n_radial];
        let shift = v - 1e-9 * v.abs().max(1.0);
        for _ in 0..3 {
            y = tridiagonal_solve(&diag, &off, shift, &y);
            let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            y.iter_mut().for_each(|a| *a /= norm);
        }
        let mut r2 = 0.0;
        for i in 0..n_radial {
            let mut t = (diag[i] - v) * y[i];
            if i > 0 {
                t += off[i - 1] * y[i - 1];
            }
            if i + 1 < n_radial {
                t += off[i] * y[i + 1];
            }
            r2 += t * t;
        }
        let mut phi: Vec<f64> = y.iter().zip(&mass).map(|(a, w)| a / w.sqrt()).collect();
        super::fix_sign(&mut phi);
        nodal.push(nodal_domains_dims(&phi, [n_radial, 1, 1])?);
        fields.push(phi);
        eigenvalues.push(v);
        residuals.push(r2.sqrt());
    }
    Ok(EigenResult {
        problem: Problem::DiskNeumann,
        clusters: clusters(&eigenvalues, CLUSTER_WIDTH),
        eigenvalues,
        eigenfields: fields,
        dims: [n_radial, 1, 1],
        residuals,
        weight_descriptor: format!("unit disk, Neumann, angular indices {used:?}"),
        nodal_counts: nodal,
    })
}

/// Reference values used by the checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleTable {
    pub legendre_spectrum: Vec<f64>,
    /// `j'_{l,1}` for `l = 0..=4`.
    pub bessel_prime_zeros: Vec<f64>,
    /// Energy of `u_s` per unit transverse measure.
    pub soliton_line_energy: f64,
}

impl OracleTable {
    pub fn new(n_legendre: usize) -> Result<Self> {
        Ok(Self {
            legendre_spectrum: legendre_spectrum(n_legendre),
            bessel_prime_zeros: (0..=4).map(bessel_prime_zero).collect::<Result<_>>()?,
            soliton_line_energy: 2.0 * SQRT_2 / 3.0,
        })
    }

    /// `tanh(x / sqrt 2)`.
    pub fn soliton_profile(x: f64) -> f64 {
        (x / SQRT_2).tanh()
    }

    /// `|u_s'|^2 / 2 + (1 - u_s^2)^2 / 4 = sech^4(x / sqrt 2) / 2`.
    pub fn soliton_energy_density(x: f64) -> f64 {
        let c = (x / SQRT_2).cosh();
        0.5 / (c * c * c * c)
    }
}
