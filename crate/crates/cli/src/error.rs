//! Process exit discipline: 0 success, 2 input error, 3 numerical
//! failure, 4 comparison refusal.

use newshawk_core::Error;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_REFUSAL: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn refusal(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_REFUSAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            // Bad or unusable inputs.
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::InvalidEvents { .. }
            | Error::UnsortedNews { .. }
            | Error::UnknownVariant { .. }
            | Error::InvalidParameter { .. }
            | Error::InsufficientData { .. } => EXIT_INPUT,
            // Mismatched data identities between artifacts.
            Error::FingerprintMismatch { .. } => EXIT_REFUSAL,
            // Everything else is a numerical or model failure.
            _ => EXIT_NUMERICAL,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}
