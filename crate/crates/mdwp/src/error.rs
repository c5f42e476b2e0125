use std::io;

use thiserror::Error;

use crate::message::ErrorCode;

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("handshake failed: {0}")]
    Handshake(String),
    #[error("{code}: {msg}")]
    Remote { code: ErrorCode, msg: String },
    #[error("session is dead: {0}")]
    SessionDead(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("could not launch target VM: {0}")]
    Spawn(String),
    #[error("mirror belongs to a different session")]
    ForeignMirror,
}

impl LinkError {
    /// The peer's error code, for errors reported by the VM.
    pub fn code(&self) -> Option<&ErrorCode> {
        match self {
            LinkError::Remote { code, .. } => Some(code),
            _ => None,
        }
    }

    pub fn is_fatal(&self) -> bool {
        !matches!(self, LinkError::Remote { .. } | LinkError::ForeignMirror)
    }
}

pub type Result<T> = std::result::Result<T, LinkError>;
