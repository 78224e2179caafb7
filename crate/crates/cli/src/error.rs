use std::fmt;

/// Failure classes with stable process exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gks_rom::Error> for CliError {
    fn from(e: gks_rom::Error) -> Self {
        use gks_rom::Error as E;
        let msg = e.to_string();
        match e {
            E::IntegrationFailure { .. } | E::CampaignFailure { .. } | E::Numerical(_) => CliError::Numerical(msg),
            E::Io(_) | E::Format(_) => CliError::Io(msg),
            _ => CliError::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
