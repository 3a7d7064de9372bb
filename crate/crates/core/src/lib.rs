//! Ginzburg–Landau fields on strips and cylinders: minimizers with imposed
//! reflection symmetries, their stability and weighted spectra, and
//! mountain-pass saddles between the two phase-imprinted states.

// Negated comparisons reject NaN on purpose; index loops mirror the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod lab;
pub mod linalg;
pub mod minimize;
pub mod mountain;
pub mod spectral;

pub use error::{GlError, Result};
pub use field::{project_symmetry, symmetry_residual, Field2, SymmetryClass};
pub use grid::{AxiGrid, Grid, SectorGrid3, StripGrid};

/// Threshold half-width `pi / sqrt 2` separating soliton and vortex minimizers on the strip.
pub const STRIP_THRESHOLD: f64 = std::f64::consts::PI / std::f64::consts::SQRT_2;

/// Energy per unit transverse length of the one-dimensional soliton, `2 sqrt 2 / 3`.
pub const SOLITON_LINE_ENERGY: f64 = 2.0 * std::f64::consts::SQRT_2 / 3.0;
