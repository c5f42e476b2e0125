use thiserror::Error;

/// Errors that stop a program from being loaded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        message: String,
        line: u32,
        column: u32,
    },
    #[error("{0}")]
    Semantic(String),
    #[error("purity violations: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Purity(Vec<PurityDiagnostic>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PurityDiagnostic {
    pub message: String,
    pub class: String,
    pub method: String,
    pub line: u32,
}

impl std::fmt::Display for PurityDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}::{} line {}: {}",
            self.class, self.method, self.line, self.message
        )
    }
}

/// A runtime error terminates the program (exit status 4).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RuntimeError {
    pub message: String,
    pub line: u32,
}

impl RuntimeError {
    pub fn new(message: impl Into<String>, line: u32) -> Self {
        RuntimeError {
            message: message.into(),
            line,
        }
    }
}
