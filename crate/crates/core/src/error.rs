use thiserror::Error;

/// Unified error type for the model crates.
///
/// The CLI maps these onto its exit codes: `Config` -> 1, everything
/// model/solver-related -> 2 (oracle failures are detected separately).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("gain {g} exceeds the overflow guard g <= {limit}")]
    GainOverflow { g: f64, limit: f64 },

    #[error(
        "fock truncation: cutoff {cutoff} leaves tail mass {tail:.3e} above 1e-8; \
         required cutoff {required}"
    )]
    Truncation { cutoff: usize, tail: f64, required: usize },

    #[error(
        "quadrature not converged: {quantity} changed by {rel_change:.3e} on grid \
         refinement (limit {limit:.1e})"
    )]
    Convergence { quantity: &'static str, rel_change: f64, limit: f64 },

    #[error("singular design matrix: {0}")]
    Rank(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("no crossing found: {0}")]
    NotFound(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("shape error: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
