use std::fmt;

/// Failure classes, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or inconsistent configuration (exit 2).
    Config(String),
    /// A numerical guard tripped (exit 3).
    Numerical(String),
    /// An iteration stopped without converging (exit 4).
    NonConvergence(String),
    /// Output could not be written (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical guard: {m}"),
            CliError::NonConvergence(m) => write!(f, "not converged: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rfh_core::Error> for CliError {
    fn from(e: rfh_core::Error) -> Self {
        use rfh_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::Unsupported(_) | E::Format(_) => CliError::Config(e.to_string()),
            E::QuadratureNotConverged(_) | E::TailFitRejected(_) | E::NumericalGuard(_) => CliError::Numerical(e.to_string()),
            E::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
