//! Stream messages exchanged with board clients.
//!
//! Every message is one JSON object with a `type` field. Clients send
//! `token_event`, `media_ended`, `save_layout` and `restore_layout`; the
//! server sends `state`, `signal` and `playback` to every subscriber, and
//! `ack` or `error` to the sender only.

use serde::{Deserialize, Serialize};
use storygrid_core::gesture::TokenEvent;
use storygrid_core::model::ObjectId;
use storygrid_core::persist::BoardView;
use storygrid_core::playback::PlaybackCommand;
use storygrid_core::signal::Signal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// Fields as in a log line: `ts_ms`, `token`, `phase`, `col`, `row`.
    TokenEvent(TokenEvent),
    MediaEnded {
        object_id: ObjectId,
    },
    SaveLayout {
        name: String,
    },
    RestoreLayout {
        name: String,
    },
}

impl ClientMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientMessage::TokenEvent(_) => "token_event",
            ClientMessage::MediaEnded { .. } => "media_ended",
            ClientMessage::SaveLayout { .. } => "save_layout",
            ClientMessage::RestoreLayout { .. } => "restore_layout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    /// Full board snapshot after an accepted message, with any signals it raised.
    State {
        session_id: String,
        seq: u64,
        board: BoardView,
        signals: Vec<Signal>,
    },
    /// Signals from an accepted message that left the board unchanged.
    Signal {
        session_id: String,
        seq: u64,
        signals: Vec<Signal>,
    },
    Playback {
        session_id: String,
        seq: u64,
        #[serde(flatten)]
        command: PlaybackCommand,
    },
    Ack {
        seq: u64,
        request: String,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn seq(&self) -> Option<u64> {
        match self {
            ServerMessage::State { seq, .. }
            | ServerMessage::Signal { seq, .. }
            | ServerMessage::Playback { seq, .. }
            | ServerMessage::Ack { seq, .. } => Some(*seq),
            ServerMessage::Error { .. } => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}
