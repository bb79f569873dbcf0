use std::fmt;

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Io(String, std::io::Error),
    Config(String),
    Counts(String),
    Usage(String),
    Core(swapchain::Error),
}

impl CliError {
    /// 3 for numerical failures, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(path, e) => write!(f, "{path}: {e}"),
            CliError::Config(msg) => write!(f, "invalid config: {msg}"),
            CliError::Counts(msg) => write!(f, "invalid counts file: {msg}"),
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) if e.is_numerical() => write!(f, "numerical failure: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<swapchain::Error> for CliError {
    fn from(e: swapchain::Error) -> Self {
        CliError::Core(e)
    }
}
