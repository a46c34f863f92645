use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no sign change of the dispersion function in bracket ({lo}, {hi}) for mode {n}")]
    BracketViolation { n: usize, lo: f64, hi: f64 },

    #[error("strip widths differ: {0} vs {1}")]
    WidthMismatch(f64, f64),

    #[error("trial energy {lambda} is within {rel_tol:e} (relative) of an axial-stiffness pole at {pole}")]
    Pole { lambda: f64, pole: f64, rel_tol: f64 },

    #[error("matching matrix is not singular at lambda = {lambda}: sigma_min / |C| = {ratio:e}")]
    NotAtRoot { lambda: f64, ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature failed to converge: last two levels {prev} and {last}")]
    QuadratureNonConvergence { prev: f64, last: f64 },

    #[error("grid too coarse: nx = {nx}, ny = {ny} (both must be at least 16)")]
    GridTooCoarse { nx: usize, ny: usize },

    #[error("shifted operator is not positive definite (shift {shift} is not below the spectrum)")]
    ShiftNotBelowSpectrum { shift: f64 },

    #[error("eigensolver did not converge after {iterations} Lanczos steps; worst residual {residual:e}")]
    EigenNonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
