//! Batch front door: configuration, versioned reports and the subcommands
//! behind the `psieve` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{check, construct, oracle, presets, verify, Options, Outcome};
pub use config::{ConfigError, Resolved, RunConfig};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    AdmissibilityFailed = 1,
    /// Empty survivors or a halving violation.
    ConstructionFailed = 2,
    VerificationFailed = 3,
    InputError = 4,
    PrecisionCap = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}
