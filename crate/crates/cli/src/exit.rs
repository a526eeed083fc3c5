//! Exit statuses and the error type carrying them.

use std::fmt;

use blowup_core::Error;

pub const OK: u8 = 0;
pub const CONFIG: u8 = 1;
pub const HYPOTHESIS: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const CHECK_FAILED: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }

    pub fn config(message: impl fmt::Display) -> Self {
        Self::new(CONFIG, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::HypothesisViolation(_) => HYPOTHESIS,
            Error::NumericalFailure { .. } | Error::Divergence(_) => NUMERICAL,
            _ => CONFIG,
        };
        Self::new(code, e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(CONFIG, e)
    }
}
