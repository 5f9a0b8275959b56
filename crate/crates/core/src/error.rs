use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),
    #[error("inadmissible case d={d}, n={n}: need 2n - d > 0")]
    Inadmissible { d: u32, n: u32 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("integrand not monotone: {0}")]
    NotMonotone(String),
    #[error("inconclusive tail: {0}")]
    InconclusiveTail(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Inadmissible { .. } | Error::MalformedInput(_) | Error::NotMonotone(_) => 2,
            _ => 3,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::ToleranceUnreachable(_) => "tolerance_unreachable",
            Error::Inadmissible { .. } => "inadmissible",
            Error::NoConvergence(_) => "no_convergence",
            Error::MalformedInput(_) => "malformed_input",
            Error::Resource(_) => "resource",
            Error::NotMonotone(_) => "not_monotone",
            Error::InconclusiveTail(_) => "inconclusive_tail",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
