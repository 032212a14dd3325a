use std::fmt;

use crate::settings::UsageError;

#[derive(Debug)]
pub enum CliError {
    /// bad input; exit status 2
    Usage(UsageError),
    /// a numerical routine failed on valid input
    Compute(fading_rates::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => e.fmt(f),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Domain errors become usage errors naming the parameter.
impl From<fading_rates::Error> for CliError {
    fn from(e: fading_rates::Error) -> Self {
        match e {
            fading_rates::Error::Domain { name, .. } => CliError::Usage(UsageError::new(name, e.to_string())),
            other => CliError::Compute(other),
        }
    }
}
