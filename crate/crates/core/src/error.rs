use std::io;

use crate::physics::BodyId;

/// Errors produced by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported collider pair: {0} vs {1}")]
    UnsupportedPair(&'static str, &'static str),

    #[error("invalid action at index {index}: {reason}")]
    InvalidAction { index: usize, reason: String },

    #[error("simulation diverged: body {0} has a non-finite state")]
    Diverged(BodyId),

    #[error("action mode conflict: {0}")]
    ModeConflict(String),

    #[error("interaction refused: {0}")]
    InteractionRefused(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("episode finished; call reset first")]
    EpisodeFinished,

    #[error("environment has not been reset")]
    NotReset,

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_action(index: usize, reason: impl Into<String>) -> Self {
        Error::InvalidAction {
            index,
            reason: reason.into(),
        }
    }
}

/// Stable numeric codes shared by the wire protocol and the C interface.
pub mod code {
    pub const OK: i32 = 0;
    pub const UNSUPPORTED_PAIR: i32 = 1;
    pub const INVALID_ACTION: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const MODE_CONFLICT: i32 = 4;
    pub const INTERACTION_REFUSED: i32 = 5;
    pub const NOT_FOUND: i32 = 6;
    pub const INVALID_GEOMETRY: i32 = 7;
    pub const CONFIG: i32 = 8;
    pub const EPISODE_FINISHED: i32 = 9;
    pub const NOT_RESET: i32 = 10;
    pub const PROTOCOL: i32 = 11;
    pub const IO: i32 = 12;
    pub const JSON: i32 = 13;
}

impl Error {
    pub fn code(&self) -> i32 {
        match self {
            Error::UnsupportedPair(..) => code::UNSUPPORTED_PAIR,
            Error::InvalidAction { .. } => code::INVALID_ACTION,
            Error::Diverged(_) => code::DIVERGED,
            Error::ModeConflict(_) => code::MODE_CONFLICT,
            Error::InteractionRefused(_) => code::INTERACTION_REFUSED,
            Error::NotFound(_) => code::NOT_FOUND,
            Error::InvalidGeometry(_) => code::INVALID_GEOMETRY,
            Error::Config(_) => code::CONFIG,
            Error::EpisodeFinished => code::EPISODE_FINISHED,
            Error::NotReset => code::NOT_RESET,
            Error::Protocol(_) => code::PROTOCOL,
            Error::Io(_) => code::IO,
            Error::Json(_) => code::JSON,
        }
    }
}
