//! One-dimensional profiles on the finite cylinder `[-R, R] x (disk of radius d)`.
//!
//! `Xi_R` solves `Xi'' = -(1 - Xi^2) Xi` with `Xi(+-R) = +-1`; it satisfies the
//! first integral `(Xi')^2 = q_R + (1 - Xi^2)^2 / 2`, so
//! `x = int_0^Xi (q_R + (1 - s^2)^2 / 2)^(-1/2) ds`. All integrals are taken in
//! the variable `t = 1 - s` on geometrically graded panels, which resolves the
//! `s -> 1` end even when `q_R` is far below machine epsilon.

use super::flow::{Flow, FlowOptions};
use crate::energy::energy;
use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::{AxiGrid, Grid};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// `int_a^1 g(t) dt` on panels `[2^-(k+1), 2^-k]`, refined down to `t_min`.
fn graded_integral(a: f64, t_min: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = rule();
    let mut total = 0.0;
    let mut hi = 1.0f64;
    loop {
        let lo_full = 0.5 * hi;
        let lo = lo_full.max(a);
        if lo < hi {
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in xs.iter().zip(ws) {
                total += half * w * g(mid + half * x);
            }
        }
        if lo_full <= a {
            break;
        }
        hi = lo_full;
        if hi < t_min {
            // Below t_min the integrand is constant to relative accuracy 1e-12.
            total += (hi - a.max(0.0)) * g(0.5 * hi);
            break;
        }
    }
    total
}

fn potential_term(t: f64) -> f64 {
    let w = t * (2.0 - t);
    0.5 * w * w
}

/// `int_0^1 (q + (1 - s^2)^2 / 2)^(-1/2) ds`.
pub fn half_length(q: f64) -> f64 {
    graded_integral(0.0, 1e-6 * q.sqrt(), |t| 1.0 / (q + potential_term(t)).sqrt())
}

/// Energy per unit cross-sectional area of `(0, Xi_R)`.
pub fn soliton_line_energy(q: f64) -> f64 {
    2.0 * graded_integral(0.0, 1e-6 * q.sqrt(), |t| {
        let p = potential_term(t);
        (0.5 * q + p) / (q + p).sqrt()
    })
}

/// The constant `q_R` with `half_length(q_R) = R`.
pub fn q_of_r(r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GlError::Bracket(format!("R = {r} must be positive")));
    }
    let (mut lo, mut hi) = (-300.0f64, 8.0f64);
    let f = |lq: f64| half_length(10f64.powf(lq)) - r;
    if f(lo) < 0.0 {
        return Err(GlError::Bracket(format!("R = {r} too large: q_R below 1e-300")));
    }
    if f(hi) > 0.0 {
        return Err(GlError::Bracket(format!("R = {r} too small: q_R above 1e8")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(10f64.powf(0.5 * (lo + hi)))
}

/// `Xi_R(x)` for `|x| <= R`, by inverting the first-integral quadrature.
pub fn xi_value(q: f64, r: f64, x: f64) -> f64 {
    let ax = x.abs().min(r);
    if ax == 0.0 {
        return 0.0;
    }
    let t_min = 1e-6 * q.sqrt();
    let h = |t: f64| graded_integral(t, t_min, |s| 1.0 / (q + potential_term(s)).sqrt());
    // h is decreasing from h(0) = R to h(1) = 0; bisect on log t.
    let (mut lo, mut hi) = (-320.0f64, 0.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(10f64.powf(mid)) > ax {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 10f64.powf(0.5 * (lo + hi));
    (1.0 - t).copysign(x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CylinderProfile {
    pub r: f64,
    pub d: f64,
    pub q_r: f64,
    pub xs: Vec<f64>,
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub chi: Vec<f64>,
    /// Energy of `(0, Xi_R)` on the cylinder of radius `d`.
    pub soliton_energy: f64,
    /// Energy of the phase-winding minimizer `rho (cos chi, sin chi)`.
    pub phase_energy: f64,
    pub phase_converged: bool,
}

/// Computes `q_R`, samples `Xi_R` on `nx` nodes, and minimizes the reduced
/// functional over `rho (cos chi, sin chi)` with `rho(+-R) = 1`, `chi(+-R) = +-pi/2`.
pub fn finite_cylinder_profiles(r: f64, d: f64, nx: usize) -> Result<CylinderProfile> {
    let q = q_of_r(r)?;
    let grid = AxiGrid::new(d, r, nx, 3)?;
    let xs: Vec<f64> = (0..nx).map(|i| grid.x(i)).collect();
    let xi: Vec<f64> = xs.iter().map(|&x| xi_value(q, r, x)).collect();
    let u = phase_minimizer(grid, 1e-10)?;
    let line: Vec<[f64; 2]> = (0..nx).map(|i| u.0.values()[i]).collect();
    let rho = line.iter().map(|v| v[0].hypot(v[1])).collect();
    let chi = line.iter().map(|v| v[1].atan2(v[0])).collect();
    Ok(CylinderProfile {
        r,
        d,
        q_r: q,
        xs,
        xi,
        rho,
        chi,
        soliton_energy: PI * d * d * soliton_line_energy(q),
        phase_energy: energy(&u.0).total,
        phase_converged: u.1,
    })
}

/// Minimizer of the energy among `x`-only maps with `u(+-R) = (0, +-1)` and
/// `u1 > 0`, on an axisymmetric grid; the boolean reports convergence.
pub fn phase_minimizer(grid: AxiGrid, tol: f64) -> Result<(Field2, bool)> {
    let r = grid.l;
    let g = Grid::Axi(grid);
    let start = Field2::from_fn(g, |p| {
        let c = PI * p[0] / (2.0 * r);
        [c.cos(), c.sin()]
    });
    let flow = Flow::new(g, Some(SymmetryClass::Radial3D))?;
    let mut u = start.into_values();
    let opts = FlowOptions { tol, max_iter: 200_000, ..FlowOptions::default() };
    let rep = flow.run(&mut u, &opts)?;
    Ok((Field2::new(g, u, Some(SymmetryClass::Radial3D))?, rep.converged))
}

/// Samples `(0, Xi_R(x))` on an axisymmetric grid whose half-length is `R`.
pub fn sample_cylinder_soliton(grid: AxiGrid) -> Result<Field2> {
    let q = q_of_r(grid.l)?;
    let col: Vec<f64> = (0..grid.nx).map(|i| xi_value(q, grid.l, grid.x(i))).collect();
    let g = Grid::Axi(grid);
    let values = (0..g.len()).map(|n| [0.0, col[n % grid.nx]]).collect();
    Field2::new(g, values, Some(SymmetryClass::Radial3D))
}

/// Energy per unit area of the infinite soliton, the `R -> infinity` limit.
pub fn soliton_line_energy_limit() -> f64 {
    2.0 * SQRT_2 / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn large_q_limit() {
        // For large q the integrand is nearly constant 1/sqrt(q).
        let q = 1e6;
        assert!((half_length(q) * q.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn q_monotone_and_xi_near_tanh() {
        let qs: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&r| q_of_r(r).unwrap()).collect();
        assert!(qs.windows(2).all(|w| w[1] < w[0]));
        let q = qs[3];
        for k in 0..=50 {
            let x = -5.0 + 0.2 * k as f64;
            assert!((xi_value(q, 40.0, x) - (x / SQRT_2).tanh()).abs() < 1e-3);
        }
        assert_eq!(xi_value(q, 40.0, 40.0), 1.0);
    }

    #[test]
    fn first_integral_holds() {
        let (r, q) = (5.0, q_of_r(5.0).unwrap());
        let h = 1e-4;
        for k in 1..10 {
            let x = 0.5 * k as f64;
            let d = (xi_value(q, r, x + h) - xi_value(q, r, x - h)) / (2.0 * h);
            let xi = xi_value(q, r, x);
            let rhs = q + 0.5 * (1.0 - xi * xi).powi(2);
            assert!((d * d - rhs).abs() < 1e-7, "{x}: {} vs {rhs}", d * d);
        }
    }

    #[test]
    fn soliton_energy_decreases_to_limit() {
        let e: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&r| soliton_line_energy(q_of_r(r).unwrap())).collect();
        // Beyond R = 20 the decrease (of order q_R) is below double precision.
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        let small: Vec<f64> = [1.0, 2.0, 3.0, 5.0].iter().map(|&r| soliton_line_energy(q_of_r(r).unwrap())).collect();
        assert!(small.windows(2).all(|w| w[1] < w[0]));
        assert!((e[3] / soliton_line_energy_limit() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_failures() {
        assert!(q_of_r(1e4).is_err());
        assert!(q_of_r(-1.0).is_err());
    }
}
