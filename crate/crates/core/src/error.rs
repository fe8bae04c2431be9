use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Evaluation hit a pole or left the domain of a branch (÷0, sqrt of a negative, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("jet order {requested} exceeds the configured maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("metric is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("metric fails the definiteness check at {point:?}: {detail}")]
    Definiteness { point: Vec<f64>, detail: String },

    #[error("model error: {0}")]
    Model(String),

    /// A constructor's own consistency check failed, which points at convention drift.
    #[error("self-check failed: {name} residual {residual:e} exceeds {bound:e}")]
    SelfCheck {
        name: String,
        residual: f64,
        bound: f64,
    },

    #[error("no periodic orbit: {0}")]
    NoPeriodicOrbit(String),

    #[error("tolerance not met: {0}")]
    Tolerance(String),

    #[error("quantity is not constant: {0}")]
    NonConstant(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used in reports and by the C interface.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Order { .. } => "OrderError",
            Error::SingularMetric { .. } => "SingularMetric",
            Error::Param(_) => "ParamError",
            Error::Definiteness { .. } => "DefinitenessError",
            Error::Model(_) => "ModelError",
            Error::SelfCheck { .. } => "SelfCheckError",
            Error::NoPeriodicOrbit(_) => "NoPeriodicOrbit",
            Error::Tolerance(_) => "ToleranceError",
            Error::NonConstant(_) => "NonConstantError",
            Error::Degenerate(_) => "DegenerateError",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
