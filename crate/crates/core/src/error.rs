use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value or input argument is out of its valid domain.
    /// `key` names the offending field (dotted path where one exists).
    #[error("invalid {key}: {reason}")]
    Validation { key: String, reason: String },

    #[error("time {t} s is outside the trajectory span [0, {duration}] s")]
    OutOfRange { t: f64, duration: f64 },

    #[error("point ({x}, {y}, {z}) is not in front of the surface (z must be > 0)")]
    BehindSurface { x: f64, y: f64, z: f64 },

    #[error("matrix dimensions differ: {left_cols}x{left_rows} vs {right_cols}x{right_rows}")]
    DimensionMismatch {
        left_cols: usize,
        left_rows: usize,
        right_cols: usize,
        right_rows: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A loaded trace parsed fine but breaks a trace invariant.
    #[error("trace invariant `{invariant}` violated: {detail}")]
    Invariant { invariant: &'static str, detail: String },

    #[error("i/o error at byte offset {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
