use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const ACCEPTANCE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const DEGENERATE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Resource(String),
    #[error("degenerate Fermi level: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Core(#[from] ltlab_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ltlab_core::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Resource(_) | CliError::Io(_) => exit::RESOURCE,
            CliError::Degenerate(_) => exit::DEGENERATE,
            CliError::Core(e) => match e {
                E::CutoffInsufficient(_) | E::BudgetExceeded { .. } | E::Quadrature { .. } | E::Eigensolver(_) => {
                    exit::RESOURCE
                }
                E::Degenerate(_) => exit::DEGENERATE,
                _ => exit::CONFIG,
            },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
