use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: non-finite input {name} = {value}")]
    NonFinite {
        op: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("{op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("at z = {z}: {source}")]
    AtPoint {
        z: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }

    pub(crate) fn at(self, z: f64) -> Self {
        Error::AtPoint {
            z,
            source: Box::new(self),
        }
    }
}

/// Rejects NaN and infinities with the operation and argument name attached.
#[inline]
pub(crate) fn finite(op: &'static str, name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { op, name, value })
    }
}
