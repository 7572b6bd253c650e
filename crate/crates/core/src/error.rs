use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range arguments.
    #[error("input error: {0}")]
    Input(String),

    /// Arguments outside the domain of a partial map, e.g. `p` below rank n/2.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request would exceed a configured resource guard.
    #[error("resource limit: {what} (estimated cost {estimate})")]
    Resource { what: String, estimate: String },

    /// A construction that must succeed did not; carries diagnostics.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, estimate: impl Into<String>) -> Self {
        Error::Resource { what: what.into(), estimate: estimate.into() }
    }
}
