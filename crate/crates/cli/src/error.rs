use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Model(thzlab::Error),

    #[error("validation failed: {0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn validation(field: &str, reason: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Model(_) => "model",
            CliError::ChecksFailed(_) => "checks_failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut e = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Parse { line, column, .. } => {
                e["line"] = json!(line);
                e["column"] = json!(column);
            }
            CliError::Validation { field, .. } => e["field"] = json!(field),
            CliError::Io { path, .. } => e["path"] = json!(path),
            _ => {}
        }
        json!({ "error": e })
    }
}

impl From<thzlab::Error> for CliError {
    fn from(e: thzlab::Error) -> Self {
        match e {
            thzlab::Error::Validation { field, reason } => CliError::Validation {
                field: field.to_string(),
                reason,
            },
            other => CliError::Model(other),
        }
    }
}
