use std::fmt;

use serde_json::{json, Value};
use spinlink_core::Error as ModelError;

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
pub enum AppError {
    /// Bad configuration: unknown key, wrong type, out-of-range value.
    Config { key: Option<String>, message: String },
    Model(ModelError),
    Io { path: String, message: String },
}

impl AppError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Config { key: Some(key.into()), message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        AppError::Config { key: None, message: message.into() }
    }

    /// 1 for anything the user can fix by changing inputs, 2 for numerical
    /// and environment failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config { .. } => 1,
            AppError::Model(e) if e.is_validation() => 1,
            AppError::Model(_) | AppError::Io { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Config { .. } => "config",
            AppError::Model(e) => e.kind(),
            AppError::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            AppError::Config { key: Some(k), .. } => v["key"] = json!(k),
            AppError::Model(ModelError::InvalidParameter { name, value, .. }) => {
                v["parameter"] = json!(name);
                v["value"] = finite_or_null(*value);
            }
            AppError::Model(ModelError::NoAcceptance { p_succ }) => v["p_succ"] = finite_or_null(*p_succ),
            AppError::Io { path, .. } => v["path"] = json!(path),
            _ => {}
        }
        v
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config { key: Some(k), message } => write!(f, "{k}: {message}"),
            AppError::Config { key: None, message } => f.write_str(message),
            AppError::Model(e) => write!(f, "{e}"),
            AppError::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        AppError::Model(e)
    }
}

pub type AppResult<T> = Result<T, AppError>;
