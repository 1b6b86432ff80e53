use thiserror::Error;

/// Errors raised by the propagation toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("singular expansion: {0}")]
    Singular(String),

    #[error("requested order {requested} exceeds available order {available}")]
    OutOfOrder { requested: usize, available: usize },

    #[error("degenerate map: {0}")]
    Degenerate(String),

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("optimizer failed to converge (residual {residual:e}): {message}")]
    Optimizer { residual: f64, message: String },

    #[error("kernel {id}: {source}")]
    Kernel {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }

    pub(crate) fn in_kernel(self, id: &str) -> Self {
        Error::Kernel {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
