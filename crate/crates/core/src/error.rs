use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid flux: {0}")]
    InvalidFlux(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    /// Signals a bug in the engine, never bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn out_of_domain(what: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::OutOfDomain { what, value, lo, hi }
    }
}
