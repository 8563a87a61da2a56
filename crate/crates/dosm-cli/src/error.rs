//! CLI errors and their exit codes: 1 for validation problems (bad flags,
//! malformed inputs, missing checkpoints), 2 for runtime failures. Exit
//! code 3 (optimization dominated by infeasible solves) is not an error —
//! runs complete and write their outputs — so it is returned as a status,
//! not carried here.

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// Shorthand constructors so call sites read as intent.
pub fn validation(msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(msg.to_string())
}

pub fn runtime(msg: impl std::fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}
