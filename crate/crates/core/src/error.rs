use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solvers and their configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Riccati integration produced a non-finite value at x = {x} (lambda = {lambda})")]
    RiccatiBlowUp { x: f64, lambda: Complex64 },

    #[error("m-function evaluation failed at f = {f}: {source}")]
    Contour {
        f: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("rank-deficient least-squares system (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("denominator roots {separation:e} apart are not simple; reduce the degree")]
    MultipleRoots { separation: f64 },

    #[error("eigenvalue computation did not converge")]
    Eigen,

    #[error("singular matrix at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("boundary-value solve failed at f = {f}: {source}")]
    FrequencySolve {
        f: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} frequency solves failed (first: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: Box<Error>,
    },

    #[error("time step {step} failed: {source}")]
    TimeStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::RiccatiBlowUp { .. } => "riccati_blow_up",
            Error::Contour { .. } => "contour",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::MultipleRoots { .. } => "multiple_roots",
            Error::Eigen => "eigen",
            Error::Singular { .. } => "singular",
            Error::FrequencySolve { .. } => "frequency_solve",
            Error::TooManyFailures { .. } => "too_many_failures",
            Error::TimeStep { .. } => "time_step",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
