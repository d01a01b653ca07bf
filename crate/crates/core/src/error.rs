use thiserror::Error;

/// Errors raised by the distribution, estimator, asymptotic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A moment required by a formula does not exist for the distribution.
    #[error("moment of order {order} does not exist for {family}")]
    MomentUnavailable { order: u32, family: String },

    /// A smoothness / positivity condition needed by a result is violated.
    #[error("condition {label} violated: {detail}")]
    ConditionViolated { label: String, detail: String },

    /// A root bracket or quadrature failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A series handed to a correlation estimate has zero variance.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_moment_unavailable(&self) -> bool {
        matches!(self, Error::MomentUnavailable { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
