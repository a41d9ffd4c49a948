use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration or geometry.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge: estimate {value:e} with error {error_estimate:e} \
         after {subdivisions} subdivisions (tolerance {tolerance:e})"
    )]
    NonConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
        tolerance: f64,
    },

    #[error("{censored} of {total} paths were censored (limit is 1%)")]
    ExcessiveCensoring { censored: usize, total: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),
}

impl Error {
    /// True for failures of a numerical method as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::ExcessiveCensoring { .. } | Error::SingularSystem(_)
        )
    }
}
