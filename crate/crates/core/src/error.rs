use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("unsupported maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),

    #[error("bad pattern magic (expected NSP1)")]
    BadMagic,

    #[error("truncated pattern: expected {expected} payload bytes, found {found}")]
    TruncatedPattern { expected: usize, found: usize },

    #[error("pattern payload has {extra} trailing bytes")]
    TrailingPattern { extra: usize },

    #[error("invalid quadrant code {code} at index {index}")]
    InvalidQuadrantCode { code: u8, index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        msg: msg.into(),
    }
}
