//! Front end for the witness sweeps and the verification suite.

pub mod output;
pub mod request;
pub mod scenarios;
pub mod verify;

pub use request::{CoefficientChoice, Format, Scenario, SweepRange, SweepRequest, SweepSettings};
pub use scenarios::{cmd_custom, cmd_gaussian, cmd_hybrid, cmd_sweep, cmd_thermal, Method, SweepPoint, SweepResult};
pub use verify::{cmd_verify, VerifyRequest, VerifySettings};

/// Exit status for a verification run with failing rows.
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Parameters rejected by the numerical core (guards, ranges, grids).
    #[error(transparent)]
    Core(#[from] hybrid_witness::Error),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) | CliError::Json(_) => EXIT_RUNTIME,
        }
    }
}
