//! Tail decay of the vortex minimizer towards the soliton.

use crate::error::{GlError, Result};
use crate::field::Field2;
use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// Smallest number of x-slices in a fit window.
pub const MIN_SLICES: usize = 10;

/// Largest polynomial power tested.
pub const MAX_POWER: u32 = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    /// `[x_min, x_max]`.
    pub window: [f64; 2],
    pub xs: Vec<f64>,
    /// `ln sup_y |u - reference|(x, .)` per slice.
    pub samples: Vec<f64>,
    /// Least-squares slope of `samples` against `xs`.
    pub slope: f64,
    pub intercept: f64,
    /// Entry `k - 1`: `(1 + x)^k sup_y |u - reference|` is decreasing on the later half of the window.
    pub polynomial_test: Vec<bool>,
}

/// Default window `[max(4, 2d), L - 5]`, clipped to the positive half-line.
pub fn default_window(grid: &Grid) -> [f64; 2] {
    [(2.0 * grid.d()).max(4.0), grid.l() - 5.0]
}

/// Fits the tail of `u` against `reference` on `x >= 0` within [`default_window`].
pub fn decay_fit(u: &Field2, reference: &Field2) -> Result<DecayFit> {
    decay_fit_window(u, reference, default_window(u.grid()))
}

pub fn decay_fit_window(u: &Field2, reference: &Field2, window: [f64; 2]) -> Result<DecayFit> {
    let grid = *u.grid();
    if *reference.grid() != grid {
        return Err(GlError::DimensionMismatch("reference lives on a different grid".into()));
    }
    let [nx, ny, nz] = grid.dims();
    let slices: Vec<usize> = (0..nx).filter(|&i| (window[0]..=window[1]).contains(&grid.x(i))).collect();
    if slices.len() < MIN_SLICES {
        return Err(GlError::InvalidArgument(format!(
            "decay window [{}, {}] holds {} slices, need {MIN_SLICES}",
            window[0],
            window[1],
            slices.len()
        )));
    }
    let (a, b) = (u.values(), reference.values());
    let omega: Vec<f64> = slices
        .iter()
        .map(|&i| {
            let mut m = 0.0f64;
            for j in 0..ny {
                for k in 0..nz {
                    let n = grid.index(i, j, k);
                    m = m.max((a[n][0] - b[n][0]).hypot(a[n][1] - b[n][1]));
                }
            }
            m
        })
        .collect();
    if omega.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
        return Err(GlError::DegenerateTail("the difference vanishes on the fit window".into()));
    }
    let xs: Vec<f64> = slices.iter().map(|&i| grid.x(i)).collect();
    let samples: Vec<f64> = omega.iter().map(|w| w.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = samples.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&samples).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let half = xs.len() / 2;
    let polynomial_test = (1..=MAX_POWER)
        .map(|k| {
            let g: Vec<f64> = xs.iter().zip(&omega).map(|(x, w)| (1.0 + x).powi(k as i32) * w).collect();
            g[half..].windows(2).all(|p| p[1] < p[0])
        })
        .collect();
    Ok(DecayFit { window, xs, samples, slope, intercept: my - slope * mx, polynomial_test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::StripGrid;

    #[test]
    fn exponential_tail_is_recovered() {
        let g = Grid::Strip(StripGrid::new(1.0, 30.0, 241, 5).unwrap());
        let base = Field2::from_fn(g, |p| [0.0, (p[0] / 2f64.sqrt()).tanh()]);
        let bumped = Field2::from_fn(g, |p| [1e-2 * (-0.7 * p[0].abs()).exp(), (p[0] / 2f64.sqrt()).tanh()]);
        let fit = decay_fit(&bumped, &base).unwrap();
        assert!((fit.slope + 0.7).abs() < 1e-10);
        assert!(fit.polynomial_test.iter().all(|&b| b));
        assert_eq!(fit.window, [4.0, 25.0]);
    }

    #[test]
    fn algebraic_tail_fails_high_powers() {
        let g = Grid::Strip(StripGrid::new(1.0, 30.0, 241, 5).unwrap());
        let base = Field2::constant(g, [0.0, 1.0]);
        let bumped = Field2::from_fn(g, |p| [(1.0 + p[0].abs()).powi(-3), 1.0]);
        let fit = decay_fit(&bumped, &base).unwrap();
        assert_eq!(fit.polynomial_test, vec![true, true, false, false, false, false]);
    }

    #[test]
    fn identical_fields_are_degenerate() {
        let g = Grid::Strip(StripGrid::new(1.0, 30.0, 241, 5).unwrap());
        let f = Field2::from_fn(g, |p| [0.0, (p[0] / 2f64.sqrt()).tanh()]);
        assert!(matches!(decay_fit(&f, &f), Err(GlError::DegenerateTail(_))));
        let short = decay_fit_window(&f, &f, [4.0, 5.0]);
        assert!(matches!(short, Err(GlError::InvalidArgument(_))));
    }
}
