use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or model parameter is outside its valid domain.
    #[error("parameter `{field}` out of domain: {message}")]
    Domain { field: &'static str, message: String },

    /// A configuration document failed validation.
    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    /// Input data violates a precondition (unsorted tags, malformed file).
    #[error("data error: {0}")]
    Data(String),

    /// A normalisation area is empty, so the ratio is undefined.
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),

    /// A least-squares fit could not be carried out or did not converge.
    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("histogram does not cover {needed}")]
    HistogramRange { needed: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(field: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user configuration rather than a runtime
    /// failure. The CLI maps these to exit code 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Domain { .. } | Error::Json(_)
        )
    }
}
