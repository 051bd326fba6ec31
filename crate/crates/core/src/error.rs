use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A channel or grid description violates one of its invariants.
    #[error("invalid input: {0}")]
    InvalidSpec(String),

    /// Every hop has zero Doppler: the crossing rate is identically zero.
    #[error("static channel: all Doppler frequencies are zero, crossing rate is identically zero")]
    StaticChannel,

    /// The requested computation is not supported for this cascade.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative or adaptive numerical procedure did not reach its tolerance.
    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    /// The Laplace approximation is not applicable at the located critical point.
    #[error("Hessian is not positive definite at the critical point (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// Average fade duration is undefined because the crossing rate is zero.
    #[error("average fade duration undefined at threshold {threshold}: crossing rate is zero")]
    UndefinedAfd { threshold: f64 },
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(detail: impl Into<String>) -> Self {
        Error::InvalidSpec(detail.into())
    }
}
