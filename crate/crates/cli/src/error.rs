use std::fmt;

use serde::Serialize;

/// Failure reported on stderr as one JSON object.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub category: String,
    pub message: String,
    #[serde(skip)]
    pub broken_pipe: bool,
}

impl CliError {
    pub fn new(category: &str, message: impl Into<String>) -> Self {
        CliError {
            category: category.to_string(),
            message: message.into(),
            broken_pipe: false,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError::new("parse", message)
    }

    pub fn context(mut self, context: impl fmt::Display) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }

    /// Process exit status for this category.
    pub fn exit_code(&self) -> u8 {
        match self.category.as_str() {
            "usage" | "invalid_input" | "parse" | "config" => 2,
            "degenerate_geometry" | "invalid_map" | "shape_mismatch" => 3,
            "not_converged" => 4,
            "io" => 5,
            _ => 1,
        }
    }

    pub fn to_json(&self, command: Option<&str>) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a CliError,
            #[serde(skip_serializing_if = "Option::is_none")]
            command: Option<&'a str>,
        }
        serde_json::to_string(&Report {
            error: self,
            command,
        })
        .expect("plain strings serialize")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category, self.message)
    }
}

impl From<vemstab::Error> for CliError {
    fn from(e: vemstab::Error) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            broken_pipe: e.kind() == std::io::ErrorKind::BrokenPipe,
            ..CliError::new("io", e.to_string())
        }
    }
}
