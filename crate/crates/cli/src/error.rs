use serde_json::json;
use thiserror::Error;
use willmore_lab::LabError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("surface: {0}")]
    Surface(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] LabError),

    #[error("output contains a non-finite number at {0}")]
    NonFinite(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{failed} of {total} identity checks failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::Surface(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::NonFinite(_) | CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Surface(_) => "surface",
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::NonFinite(_) => "non_finite",
            CliError::Io(_) => "io",
            CliError::Verification { .. } => "verification",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
    }
}
