use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum HtoError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invariant violated: {what} (deviation {deviation:.3e}, tolerance {tolerance:.1e})")]
    Invariant {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal consistency check failed: {what} (deviation {deviation:.3e})")]
    Consistency { what: String, deviation: f64 },

    #[error("contract error: {0}")]
    Contract(String),

    #[error("inadmissible heat transfer operator: {reason} (J = {j:.17e})")]
    Inadmissible { reason: String, j: f64 },

    #[error("operator is not in the span of {{M_i†M_j}}: residual {residual:.3e} exceeds {threshold:.3e}")]
    NotInSpan { residual: f64, threshold: f64 },

    #[error("Δ target {target:.6e} is below the reachable floor {floor:.6e} at N = {n}; try N ≥ {suggested_n}")]
    BracketFailure {
        target: f64,
        floor: f64,
        n: usize,
        suggested_n: usize,
    },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("unsupported decision: {0}")]
    Unsupported(String),

    #[error("format error: {0}")]
    Format(String),
}

impl HtoError {
    pub(crate) fn invariant(what: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        HtoError::Invariant {
            what: what.into(),
            deviation,
            tolerance,
        }
    }
}

pub type Result<T> = std::result::Result<T, HtoError>;
