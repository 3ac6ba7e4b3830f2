//! Crate-wide error type.

use num_complex::Complex64;

/// Errors surfaced by the numerical operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The zero mode was used where a dynamical mode is required.
    #[error("the zero mode (0,0) does not participate in the dynamics")]
    ZeroMode,

    /// A mode window contains `khat + n*p = 0`.
    #[error("mode khat + {n}*p is the zero mode; the window is invalid")]
    ZeroModeInWindow { n: i64 },

    /// An invalid wave configuration (degenerate class, zero pump mode, ...).
    #[error("invalid wave configuration: {reason}")]
    InvalidConfig { reason: String },

    /// A window or grid was requested outside the range a table covers.
    #[error("window [{requested_min}, {requested_max}] is not covered by the table window [{table_min}, {table_max}]")]
    WindowNotCovered {
        requested_min: i64,
        requested_max: i64,
        table_min: i64,
        table_max: i64,
    },

    /// An empty or otherwise malformed window.
    #[error("invalid window: {reason}")]
    InvalidWindow { reason: String },

    /// A grid whose span is not an integer number of steps.
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    /// A trajectory left the space of finite states.
    #[error("non-finite state at step {step} (t = {time})")]
    NonFiniteState { step: usize, time: f64 },

    /// The QR iteration did not converge within the iteration cap.
    #[error("eigensolver failed to converge for a {size}x{size} matrix ({partial} eigenvalues available)")]
    EigenConvergence {
        size: usize,
        /// Eigenvalues recovered before the failure, possibly empty.
        partial: usize,
        partial_values: Vec<Complex64>,
    },

    /// An eigenpair violated the residual contract.
    #[error("eigenpair residual {residual:.3e} exceeds {tolerance:.3e} * ||M|| for lambda = {lambda}")]
    EigenResidual {
        lambda: Complex64,
        residual: f64,
        tolerance: f64,
    },

    /// The chopped-block constraints (b < 0, c > 0, 0 < b^2-4c < b^2) failed.
    #[error("chopped block j = {j} violates the spectral constraints: {reason}")]
    ChoppedConstraint { j: i64, reason: String },

    /// The block coefficients do not have the structure the orbit needs.
    #[error("orbit formulas require the j = 0 block structure: {reason}")]
    OrbitStructure { reason: String },

    /// Mismatched inputs to a multi-stage pipeline.
    #[error("inconsistent pipeline inputs: {reason}")]
    PipelineMismatch { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
