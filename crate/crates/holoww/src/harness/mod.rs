//! Configuration, experiment orchestration, outputs and the oracle suite.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod oracle;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Process exit code for an error escaping a subcommand.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigRefused(_) | Error::InvalidGrid(_) | Error::InfeasibleData(_) => EXIT_CONFIG,
        e if e.is_breakdown() => EXIT_BREAKDOWN,
        Error::ProfileUnstable(_) => EXIT_CHECK_FAILED,
        _ => EXIT_OTHER,
    }
}
