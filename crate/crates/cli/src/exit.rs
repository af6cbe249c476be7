//! Exit codes.
//!
//! | code | meaning                                          |
//! |------|--------------------------------------------------|
//! | 0    | success                                          |
//! | 1    | usage, config, I/O or other input error          |
//! | 2    | divergence or no root of the bifurcation equation |
//! | 3    | hypothesis failure (no simple zero)              |
//! | 4    | enumeration guard exceeded or resonance          |
//! | 5    | a verification check failed                      |

use std::fmt;

use qpresponse::Error;

pub const SUCCESS: i32 = 0;
pub const USAGE: i32 = 1;
pub const DIVERGENCE: i32 = 2;
pub const HYPOTHESIS: i32 = 3;
pub const GUARD: i32 = 4;
pub const CHECK_FAILED: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn code_for(e: &Error) -> i32 {
    match e {
        Error::Divergence(_) | Error::RootNotFound { .. } | Error::NonUniqueRoot { .. } => DIVERGENCE,
        Error::Hypothesis(_) => HYPOTHESIS,
        Error::Resonance { .. } | Error::GuardExceeded { .. } | Error::TreeGuard { .. } => GUARD,
        _ => USAGE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: code_for(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::usage(format!("JSON error: {e}"))
    }
}
