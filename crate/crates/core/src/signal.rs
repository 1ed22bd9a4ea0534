//! Feedback emitted while interpreting token placements.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalCode {
    EmptyUndo,
    NotOnObject,
    NotOnBorder,
    NoSuchChannel,
    AlreadyPlaying,
    NotPlaying,
    DestinationOutOfBounds,
    InvalidResizeTarget,
    GestureCancelled,
    OpCompleted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signal {
    pub code: SignalCode,
    pub detail: String,
}

impl Signal {
    pub fn new(code: SignalCode, detail: impl Into<String>) -> Self {
        Signal {
            code,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.detail)
    }
}
