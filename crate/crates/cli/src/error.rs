use std::fmt;

use qem::Error;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    /// The report or a CSV dump could not be written.
    Output(String),
}

impl CliError {
    pub fn missing(flag: &str) -> Self {
        CliError::Usage(format!("missing required option {flag}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Output(_) => 1,
            CliError::Core(Error::NotPositiveDefinite { .. } | Error::Numerical(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Output(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
