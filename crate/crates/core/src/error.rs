use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("range error: {0}")]
    Range(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{what} needs {cap} >= {needed}, but it is {available} (max usable argument: {max_usable})")]
    Capability {
        what: String,
        cap: &'static str,
        needed: f64,
        available: f64,
        max_usable: f64,
    },

    #[error("cross-check failed: {check} worst at n={worst_n}, discrepancy {discrepancy:e} > {threshold:e}")]
    CrossCheck {
        check: &'static str,
        worst_n: u64,
        discrepancy: f64,
        threshold: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cache file {path}: {reason}")]
    Cache { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
