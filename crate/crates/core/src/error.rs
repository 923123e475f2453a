use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by scenario generation, link evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A node on a backhaul chain has no parent/uplink assigned.
    #[error("unassigned backhaul node: {0}")]
    Unassigned(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("battery infeasible at slot {slot}: consumed {consumed} J exceeds stored {stored} J")]
    BatteryInfeasible { slot: u32, consumed: f64, stored: f64 },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io { path: path.into(), message: err.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
