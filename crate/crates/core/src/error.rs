use thiserror::Error;

/// Errors produced by schedule construction, evaluation and the flow simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Every Jacobian eigenvalue equals one: the map is an isometry and no
    /// schedule can improve on the identity.
    #[error("trivial transport: all spectral deviations vanish")]
    TrivialTransport,

    #[error("invalid spectral data: {0}")]
    InvalidSpectrum(String),

    #[error("map not admissible: {0}")]
    MapNotAdmissible(String),

    /// An argument fell outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quantile inversion failed: {0}")]
    Quantile(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Short machine-readable tag used by the command-line front-end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TrivialTransport => "trivial_transport",
            Error::InvalidSpectrum(_) => "invalid_spectrum",
            Error::MapNotAdmissible(_) => "map_not_admissible",
            Error::Domain(_) => "domain",
            Error::InvalidInput(_) => "invalid_input",
            Error::Quantile(_) => "quantile",
            Error::Numeric(_) => "numeric",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
