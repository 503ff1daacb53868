//! Error type shared across the crate.

/// Crate-wide error enumeration.
///
/// `Domain` marks mathematically inadmissible inputs (non-positive density,
/// `gamma <= 1`, ...); `Config` marks structurally invalid run setups;
/// `Infeasible` is returned by the planner when a search cap prevents
/// satisfying one of the admissibility inequalities, and names the binding
/// constraint.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("planning infeasible: constraint `{constraint}`: {detail}")]
    Infeasible {
        constraint: &'static str,
        detail: String,
    },

    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for domain errors.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Convenience constructor for configuration errors.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
