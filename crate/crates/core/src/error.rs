use thiserror::Error;

/// Errors raised by the survival/decay-rate machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("effective decay rate is infinite: {0}")]
    InfiniteRate(String),

    #[error("{what} is outside the supported range: {reason}")]
    Range { what: &'static str, reason: String },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("at tau = {tau}: {source}")]
    AtTau {
        tau: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// Attaches the measurement interval at which the failure happened.
    pub fn at_tau(self, tau: f64) -> Self {
        match self {
            Error::AtTau { .. } => self,
            other => Error::AtTau {
                tau,
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, with any `AtTau` wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTau { source, .. } => source.root(),
            other => other,
        }
    }

    /// The interval attached by `at_tau`, if any.
    pub fn tau(&self) -> Option<f64> {
        match self {
            Error::AtTau { tau, .. } => Some(*tau),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(
            field,
            format!("{p} is not a probability in [0, 1]"),
        ));
    }
    Ok(())
}

pub(crate) fn check_positive(field: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(field, format!("{x} must be finite and > 0")));
    }
    Ok(())
}

pub(crate) fn check_nonnegative_finite(field: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(
            field,
            format!("{x} must be finite and >= 0"),
        ));
    }
    Ok(())
}
