use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter domain error: {0}")]
    Domain(String),

    #[error("degenerate Chapman-Jouguet profile (q = q_cj = {q_cj}); algebraic decay is unsupported")]
    DegenerateProfile { q_cj: f64 },

    #[error("flux Jacobian is singular at the profile point (characteristic front): {0}")]
    SingularJacobian(String),

    #[error("decaying-mode consistency check failed at lambda = {lambda}: expected exactly one mode, spectrum {spectrum:?}")]
    ModeCount {
        lambda: Complex64,
        spectrum: Vec<Complex64>,
    },

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("domain truncation too short: tail residual {residual:e} exceeds {tolerance:e}")]
    Truncation { residual: f64, tolerance: f64 },

    #[error("determinant vanishes (or nearly) on the contour near lambda = {lambda}")]
    NearZeroOnContour { lambda: Complex64 },

    #[error("root search budget exhausted with {unresolved} unresolved boxes")]
    Budget { unresolved: usize },

    #[error("Sylvester equation not solvable: diagonal block spectra touch at x = {x}")]
    Sylvester { x: f64 },

    #[error("glancing point: branch of s is ambiguous at zeta = {zeta}")]
    Glancing { zeta: Complex64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
