use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions, copy counts or factor indices that do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    /// A value outside the domain of the requested function (log of a
    /// non-positive eigenvalue, q < 1, p outside (0, 1], ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid algorithm parameters or inputs that violate a stated invariant.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigendecomposition failed to converge (dim {dim}, frobenius norm {norm:.6e})")]
    Decomposition { dim: usize, norm: f64 },

    /// Malformed JSON payload; `field` names the schema element that failed.
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}
