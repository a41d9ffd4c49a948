//! Command-line front end: single MFPT records, sweeps, flux profiles,
//! the cross-method validation suite and manifest replay.
//!
//! Core computations are dimensionless; conversion to physical time with
//! `R²/D` happens only here.

pub mod commands;
pub mod format;
pub mod manifest;
pub mod validate;

use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const VALIDATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] narrow_escape::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) if e.is_numerical() => exit::NUMERICAL,
            CliError::Core(_) => exit::USAGE,
            CliError::Validation(_) => exit::VALIDATION,
            _ => exit::OTHER,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use narrow_escape::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), exit::USAGE);
        assert_eq!(CliError::Core(Error::Domain("x".into())).exit_code(), exit::USAGE);
        let nc = Error::NonConvergence { value: 0.0, error_estimate: 1.0, subdivisions: 1, tolerance: 0.0 };
        assert_eq!(CliError::Core(nc).exit_code(), exit::NUMERICAL);
        assert_eq!(CliError::Core(Error::ExcessiveCensoring { censored: 5, total: 10 }).exit_code(), exit::NUMERICAL);
        assert_eq!(CliError::Validation("x".into()).exit_code(), exit::VALIDATION);
        assert_eq!(CliError::Other("x".into()).exit_code(), exit::OTHER);
    }
}
