use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("`{name}` = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("hazard undefined at x = {0}: the point lies beyond the support (F(x) = 1)")]
    BeyondSupport(f64),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
