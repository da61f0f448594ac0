use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A configuration field violates its invariant.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("numerical integration failed: {0}")]
    Integration(String),

    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e} (scale {scale:.3e})")]
    NotHermitian { asymmetry: f64, scale: f64 },

    #[error("eigensolver residual {residual:.3e} exceeds {limit:.3e}")]
    Eigensolver { residual: f64, limit: f64 },

    #[error("dimension {dim} exceeds the limit of {limit}")]
    Dimension { dim: usize, limit: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("g2 analysis failed: {0}")]
    Analysis(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { op, reason: reason.into() }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
