use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("memory budget exceeded: {required} bytes required, budget is {budget} bytes")]
    ResourceExceeded { required: u64, budget: u64 },

    #[error("operator is numerically singular: eigenvalue magnitude {magnitude:e} is below the guard {threshold:e}")]
    Singular { magnitude: f64, threshold: f64 },

    #[error("power iteration did not converge in {iterations} iterations (last estimate {estimate})")]
    NoConvergence { iterations: usize, estimate: f64 },

    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("relative error is undefined for a zero-norm reference vector")]
    ZeroReference,

    #[error("dense linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
