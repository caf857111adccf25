use std::process::ExitCode;

use serde::Serialize;

/// Failures of the command-line driver, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Parse { line: Option<usize>, message: String },
    #[error("unknown key '{key}'{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnknownKey { key: String, line: Option<usize> },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::UnknownKey { .. } => "unknown_key",
            CliError::Validation(_) => "validation",
            CliError::Usage(_) => "usage",
            CliError::Runtime(_) => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    /// 2 for usage and configuration errors, 1 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) | CliError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }

    /// One-line JSON description for stderr.
    pub fn json_line(&self) -> String {
        let line = match self {
            CliError::Parse { line, .. } | CliError::UnknownKey { line, .. } => *line,
            _ => None,
        };
        serde_json::to_string(&ErrorLine {
            error: self.kind(),
            message: self.to_string(),
            line,
        })
        .expect("plain strings serialize")
    }
}

impl From<cryochain_core::Error> for CliError {
    fn from(e: cryochain_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
