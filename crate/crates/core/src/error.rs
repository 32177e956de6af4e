use thiserror::Error;

/// Errors raised by the samplers, estimators and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Every tabulated posterior weight underflowed; the observation lies
    /// outside the region the grid can represent.
    #[error("grid coverage error: observation y={y} at t={t} has no support on [{lo}, {hi}]")]
    GridCoverage { y: f64, t: f64, lo: f64, hi: f64 },

    #[error("inadmissible context at t={t}: {detail}")]
    Inadmissible { t: f64, detail: String },

    #[error("non-finite value in {term}")]
    NonFinite { term: String },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the user's configuration rather than by sampling.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. } | Error::ConfigValue { .. } | Error::UnknownKey(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
