use thiserror::Error;

/// Errors raised across the toolkit.
///
/// The variants split into two classes that the command-line front end maps
/// to different exit codes: input problems (domain, dimension, unknown names,
/// malformed specs) and numeric problems (non-convergence, maps that are not
/// physical channels).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unknown gate label `{0}`")]
    UnknownLabel(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("map is not completely positive (Choi min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is not trace preserving (defect {defect:.3e})")]
    NotTracePreserving { defect: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("insufficient data for exponent fit: {0}")]
    InsufficientSpan(String),

    #[error("query plan needs {total} queries (limit {limit}); eps must be at least {required_eps:.6}")]
    PlanOverflow {
        total: u64,
        limit: u64,
        required_eps: f64,
    },

    #[error("invalid gate or equation spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics or of physicality, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::NotCompletelyPositive { .. } | Error::NotTracePreserving { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
