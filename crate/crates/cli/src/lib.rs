//! Verification suites and ρ-scans behind the `g2roll` binary.
//!
//! Every `cmd_*` function writes its report to the supplied writer and
//! returns whether the acceptance criterion held. Errors carry their own
//! exit code.

mod commands;
mod scan;
mod tolerances;

pub use commands::{cmd_flag, cmd_phi_check, cmd_roll, cmd_verify_algebra, read_curve, AlgebraConfig, PhiConfig};
pub use scan::{cmd_scan, scan_rows, Format, ScanConfig, ScanRow};
pub use tolerances::{Tolerances, ENV_PREFIX};

use thiserror::Error;

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] g2roll::Error),
}

impl CliError {
    /// 2 for bad input and IO, 1 for numerical failures.
    pub fn code(&self) -> i32 {
        match self {
            CliError::Core(
                g2roll::Error::InvalidInput(_)
                | g2roll::Error::InsufficientSamples { .. }
                | g2roll::Error::OutOfRange(_)
                | g2roll::Error::InfiniteRho,
            ) => 2,
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}
