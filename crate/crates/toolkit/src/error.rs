use std::path::PathBuf;

use crate::format::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{path}:{error}")]
    Parse { path: String, error: ParseError },
    #[error("{path}: {first}{}", if diagnostics.len() > 1 { format!(" (and {} more)", diagnostics.len() - 1) } else { String::new() }, first = diagnostics[0])]
    Invalid {
        path: String,
        diagnostics: Vec<mrpn_core::Diagnostic>,
    },
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mrpn_core::Error),
}

impl ToolError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ToolError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 usage, 3 parse or validation, 4 budget, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Usage(_) | ToolError::Io { .. } => 2,
            ToolError::Parse { .. } | ToolError::Invalid { .. } => 3,
            ToolError::Core(mrpn_core::Error::BudgetExceeded(_)) => 4,
            ToolError::Core(_) => 1,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ToolError::Parse { error, .. } => error.code,
            ToolError::Invalid { diagnostics, .. } => diagnostics[0].code.as_str(),
            ToolError::Io { .. } => "IO",
            ToolError::Usage(_) => "USAGE",
            ToolError::Core(mrpn_core::Error::BudgetExceeded(_)) => "BUDGET",
            ToolError::Core(mrpn_core::Error::NotEnabled { .. }) => "NOT-ENABLED",
            ToolError::Core(_) => "ENGINE",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.code(), "message": self.to_string() });
        if let ToolError::Parse { path, error } = self {
            v["file"] = path.as_str().into();
            v["line"] = error.line.into();
            v["col"] = error.col.into();
        }
        if let ToolError::Invalid { path, .. } = self {
            v["file"] = path.as_str().into();
        }
        v
    }
}
