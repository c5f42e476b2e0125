use thiserror::Error;

use crate::span::SourceSpan;

/// A problem found while checking a clause against its context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            message: message.into(),
            span,
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OclError {
    #[error("{span}: lexical error: {message}")]
    Lex { message: String, span: SourceSpan },
    #[error("{span}: syntax error: {message}")]
    Syntax { message: String, span: SourceSpan },
    #[error("no context declarations")]
    Empty,
    #[error("invalid clauses: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
}

impl OclError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            OclError::Lex { span, .. } | OclError::Syntax { span, .. } => Some(*span),
            OclError::Invalid(d) => d.first().map(|d| d.span),
            OclError::Empty => None,
        }
    }
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
