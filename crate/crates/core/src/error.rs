use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Error)]
pub enum GlError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too large: {nodes} nodes exceeds cap {cap}")]
    GridTooLarge { nodes: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bad file format: {0}")]
    BadFormat(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("step size underflow at iteration {iteration} (energy {energy})")]
    StepUnderflow { iteration: usize, energy: f64 },
    #[error("not converged after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("matrix not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("modulus too small on winding loop: {0:e}")]
    ModulusTooSmall(f64),
    #[error("no zero near requested location")]
    NoZero,
    #[error("bracket failure: {0}")]
    Bracket(String),
    #[error("path construction failed at stage {stage}: barrier {barrier} exceeds budget {budget}")]
    PathBudget { stage: String, barrier: f64, budget: f64 },
    #[error("degenerate tail: {0}")]
    DegenerateTail(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GlError>;
