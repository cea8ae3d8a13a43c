//! Error types shared across the solver crates.

/// Errors produced by solvers, steppers and study drivers.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix that must be symmetric positive definite failed its Cholesky test.
    #[error("{context}: matrix is not positive definite")]
    NonPositiveDefinite { context: &'static str },

    /// A linear system could not be solved (zero pivot or inconsistent assembly).
    #[error("{context}: singular system")]
    SingularSystem { context: &'static str },

    /// Explicit step size exceeds the diffusion stability limit.
    #[error("time step {dt:.3e} exceeds stability limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    /// The inner fixed-point iteration did not contract; the step is too large.
    #[error("fixed-point iteration did not converge after {iterations} sweeps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Initial data violates the boundary compatibility requirements.
    #[error("incompatible initial data: {0}")]
    IncompatibleData(String),

    /// The tracked interface left the domain; the two-phase configuration is gone.
    #[error("interface exited the domain at z = {z:.6} (t = {t:.6})")]
    InterfaceExit { z: f64, t: f64 },

    /// No mid-level crossing was found in a diffuse frame.
    #[error("level set lost in frame {frame} (t = {t:.6})")]
    LevelSetLost { frame: usize, t: f64 },

    /// A constructor argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A monitored quantity became NaN or infinite; the run is rejected.
    #[error("{context}: non-finite value at t = {t:.6}")]
    NonFinite { context: &'static str, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
