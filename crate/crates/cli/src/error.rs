use serde::Serialize;
use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] czreach::Error),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    exit_code: i32,
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Parse(_) | Self::Validation { .. } => 2,
            Self::Verification(_) => 3,
            Self::Numerical(_) => 4,
            Self::Write { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Read { .. } => "read",
            Self::Parse(_) => "parse",
            Self::Validation { .. } => "validation",
            Self::Verification(_) => "verification",
            Self::Numerical(_) => "numerical",
            Self::Write { .. } => "write",
        }
    }

    /// Machine-readable form printed to stderr on failure.
    pub fn to_json(&self) -> String {
        let field = match self {
            Self::Validation { path, .. } => Some(path.as_str()),
            _ => None,
        };
        serde_json::to_string(&ErrorJson {
            error: self.kind(),
            message: self.to_string(),
            field,
            exit_code: self.exit_code(),
        })
        .expect("plain strings serialize")
    }
}
