use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Malformed JSON or a field of the wrong type.
    Parse,
    /// Well-formed input that describes an invalid run.
    Validation,
    /// A computation failed or produced inconsistent results.
    Numerical,
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Parse | Self::Validation => 2,
            Self::Numerical => 3,
            Self::Io => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{} error: {message}", self.label())]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Parse, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numerical, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Io, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    fn label(&self) -> &'static str {
        match self.kind {
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::Numerical => "numerical",
            ErrorKind::Io => "I/O",
        }
    }

    /// Single-line JSON record written to stderr on failure.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Errors raised while turning validated input into a scenario.
pub(crate) fn invalid(e: qfi_core::Error) -> CliError {
    CliError::validation(e.to_string())
}

/// Errors raised by the computation itself.
pub(crate) fn numerical(e: qfi_core::Error) -> CliError {
    CliError::numerical(e.to_string())
}
