//! Posters, live sessions and subscriber fan-out.
//!
//! Each session owns one board behind a mutex. A message is applied and its
//! broadcasts are queued to every subscriber while the lock is held, so each
//! subscriber sees sequence numbers in order.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::Serialize;
use storygrid_core::devlog::write_log;
use storygrid_core::gesture::{consume, TokenEvent};
use storygrid_core::model::{Board, ObjectId};
use storygrid_core::persist::{
    load_poster, parse_manifest, parse_snapshot, restore_layout, save_layout, snapshot_to_json, BoardView,
    LayoutSnapshot, ManifestError, PosterManifest, RestoreError,
};
use storygrid_core::playback::{on_media_ended, PlaybackCommand};
use storygrid_core::signal::Signal;
use thiserror::Error;
use tokio::sync::mpsc::UnboundedSender;

use crate::protocol::{ClientMessage, ServerMessage};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no poster `{0}`")]
    UnknownPoster(String),
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("no saved layout `{0}` in this session")]
    UnknownLayout(String),
    #[error("layout name `{0}` must be 1-64 characters of [A-Za-z0-9_-]")]
    InvalidLayoutName(String),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("timestamp {ts_ms} precedes the session's last event at {last}")]
    NonMonotonicTimestamp { ts_ms: u64, last: u64 },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Restore(#[from] RestoreError),
    #[error("layout storage failed: {0}")]
    Storage(#[from] std::io::Error),
}

impl ServiceError {
    /// Stable identifier sent in `error` messages and HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownPoster(_) => "UnknownPoster",
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::UnknownLayout(_) => "UnknownLayout",
            ServiceError::InvalidLayoutName(_) => "InvalidLayoutName",
            ServiceError::Malformed(_) => "Malformed",
            ServiceError::NonMonotonicTimestamp { .. } => "NonMonotonicTimestamp",
            ServiceError::Manifest(_) => "InvalidManifest",
            ServiceError::Restore(_) => "UnknownObjectInSnapshot",
            ServiceError::Storage(_) => "Storage",
        }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::Error {
            code: self.code().to_owned(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosterInfo {
    pub poster_id: String,
    pub title: String,
    pub objects: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ack {
    pub seq: u64,
}

pub type Subscriber = UnboundedSender<ServerMessage>;

struct Session {
    id: String,
    board: Board,
    seq: u64,
    last_ts: u64,
    subscribers: Vec<Subscriber>,
    layouts: BTreeMap<String, LayoutSnapshot>,
    log: Vec<TokenEvent>,
}

impl Session {
    fn state(&self, signals: Vec<Signal>) -> ServerMessage {
        ServerMessage::State {
            session_id: self.id.clone(),
            seq: self.seq,
            board: BoardView::of(&self.board),
            signals,
        }
    }

    fn broadcast(&mut self, msg: ServerMessage) {
        self.subscribers.retain(|tx| tx.send(msg.clone()).is_ok());
    }

    fn broadcast_playback(&mut self, commands: Vec<PlaybackCommand>) {
        for command in commands {
            let msg = ServerMessage::Playback {
                session_id: self.id.clone(),
                seq: self.seq,
                command,
            };
            self.broadcast(msg);
        }
    }
}

/// Shared service state.
#[derive(Default)]
pub struct Hub {
    posters: RwLock<BTreeMap<String, PosterManifest>>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
    next_session: AtomicU64,
    layout_dir: Option<PathBuf>,
}

impl Hub {
    pub fn new() -> Self {
        Self::default()
    }

    /// Saved layouts are also written under `dir/<session>/<name>.json`.
    pub fn with_layout_dir(dir: impl Into<PathBuf>) -> Self {
        Hub {
            layout_dir: Some(dir.into()),
            ..Self::default()
        }
    }

    /// Adds or replaces a poster.
    pub fn add_poster(&self, manifest: PosterManifest) -> String {
        let id = manifest.poster_id.clone();
        self.posters.write().unwrap().insert(id.clone(), manifest);
        id
    }

    pub fn upload_poster(&self, text: &str) -> Result<String, ServiceError> {
        Ok(self.add_poster(parse_manifest(text)?))
    }

    pub fn posters(&self) -> Vec<PosterInfo> {
        self.posters
            .read()
            .unwrap()
            .values()
            .map(|m| PosterInfo {
                poster_id: m.poster_id.clone(),
                title: m.title.clone(),
                objects: m.objects.len(),
            })
            .collect()
    }

    pub fn create_session(&self, poster_id: &str) -> Result<String, ServiceError> {
        let board = {
            let posters = self.posters.read().unwrap();
            let manifest = posters
                .get(poster_id)
                .ok_or_else(|| ServiceError::UnknownPoster(poster_id.to_owned()))?;
            load_poster(manifest).board
        };
        let id = format!("s{}", self.next_session.fetch_add(1, Ordering::Relaxed) + 1);
        let session = Session {
            id: id.clone(),
            board,
            seq: 0,
            last_ts: 0,
            subscribers: Vec::new(),
            layouts: BTreeMap::new(),
            log: Vec::new(),
        };
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_owned()))
    }

    /// Registers a subscriber. The current state is queued to it first.
    pub fn subscribe(&self, session_id: &str, tx: Subscriber) -> Result<(), ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        let state = s.state(Vec::new());
        if tx.send(state).is_ok() {
            s.subscribers.push(tx);
        }
        Ok(())
    }

    pub fn state(&self, session_id: &str) -> Result<ServerMessage, ServiceError> {
        let session = self.session(session_id)?;
        let s = session.lock().unwrap();
        Ok(s.state(Vec::new()))
    }

    /// Accepted token events in arrival order, as a JSON-lines log.
    pub fn event_log(&self, session_id: &str) -> Result<String, ServiceError> {
        let session = self.session(session_id)?;
        let s = session.lock().unwrap();
        Ok(write_log(&s.log))
    }

    pub fn post_event(&self, session_id: &str, event: TokenEvent) -> Result<Ack, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        if event.ts_ms < s.last_ts {
            return Err(ServiceError::NonMonotonicTimestamp {
                ts_ms: event.ts_ms,
                last: s.last_ts,
            });
        }
        let before = BoardView::of(&s.board);
        let outcome = consume(&mut s.board, &event);
        s.seq += 1;
        s.last_ts = event.ts_ms;
        s.log.push(event);
        let msg = if BoardView::of(&s.board) != before {
            s.state(outcome.signals)
        } else {
            ServerMessage::Signal {
                session_id: s.id.clone(),
                seq: s.seq,
                signals: outcome.signals,
            }
        };
        s.broadcast(msg);
        s.broadcast_playback(outcome.commands);
        Ok(Ack { seq: s.seq })
    }

    /// Renderer reports a clip finished. Late reports for idle or erased
    /// objects are acknowledged and otherwise ignored.
    pub fn media_ended(&self, session_id: &str, object_id: &ObjectId) -> Result<Ack, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        s.seq += 1;
        if on_media_ended(&mut s.board, object_id) {
            let msg = s.state(Vec::new());
            s.broadcast(msg);
        }
        Ok(Ack { seq: s.seq })
    }

    pub fn save_layout(&self, session_id: &str, name: &str) -> Result<Ack, ServiceError> {
        check_layout_name(name)?;
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        let snapshot = save_layout(&s.board, name);
        if let Some(dir) = &self.layout_dir {
            let dir = dir.join(&s.id);
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join(format!("{name}.json")), snapshot_to_json(&snapshot))?;
        }
        s.layouts.insert(name.to_owned(), snapshot);
        s.seq += 1;
        Ok(Ack { seq: s.seq })
    }

    /// Restores a layout saved earlier in this session (or found on disk).
    pub fn restore_layout(&self, session_id: &str, name: &str) -> Result<Ack, ServiceError> {
        check_layout_name(name)?;
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        let snapshot = match s.layouts.get(name) {
            Some(snap) => snap.clone(),
            None => self.load_layout_file(&s.id, name)?,
        };
        let stops = restore_layout(&mut s.board, &snapshot)?;
        s.seq += 1;
        let msg = s.state(Vec::new());
        s.broadcast(msg);
        s.broadcast_playback(stops);
        Ok(Ack { seq: s.seq })
    }

    fn load_layout_file(&self, session_id: &str, name: &str) -> Result<LayoutSnapshot, ServiceError> {
        let unknown = || ServiceError::UnknownLayout(name.to_owned());
        let dir = self.layout_dir.as_ref().ok_or_else(unknown)?;
        let text = std::fs::read_to_string(dir.join(session_id).join(format!("{name}.json"))).map_err(|_| unknown())?;
        parse_snapshot(&text).map_err(|e| ServiceError::Malformed(e.to_string()))
    }

    /// Parses and applies one stream message, returning the sender's reply.
    pub fn handle_text(&self, session_id: &str, text: &str) -> ServerMessage {
        let result = serde_json::from_str::<ClientMessage>(text)
            .map_err(|e| ServiceError::Malformed(e.to_string()))
            .and_then(|msg| self.handle(session_id, &msg).map(|ack| (msg.kind(), ack)));
        match result {
            Ok((kind, ack)) => ServerMessage::Ack {
                seq: ack.seq,
                request: kind.to_owned(),
            },
            Err(e) => e.to_message(),
        }
    }

    pub fn handle(&self, session_id: &str, msg: &ClientMessage) -> Result<Ack, ServiceError> {
        match msg {
            ClientMessage::TokenEvent(ev) => self.post_event(session_id, *ev),
            ClientMessage::MediaEnded { object_id } => self.media_ended(session_id, object_id),
            ClientMessage::SaveLayout { name } => self.save_layout(session_id, name),
            ClientMessage::RestoreLayout { name } => self.restore_layout(session_id, name),
        }
    }
}

fn check_layout_name(name: &str) -> Result<(), ServiceError> {
    let ok = (1..=64).contains(&name.len()) && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        Err(ServiceError::InvalidLayoutName(name.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use storygrid_core::gesture::TokenKind;
    use storygrid_core::model::{CellCoord, Rect};
    use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver};

    const POSTER: &str = r#"{"poster_id":"macbeth","title":"Macbeth","objects":[
        {"id":"witches","image_ref":"witches.png","av_channels":[{"kind":"video","media_ref":"witches.mp4"}]},
        {"id":"dagger","image_ref":"dagger.png"}]}"#;

    fn hub() -> (Hub, String) {
        let hub = Hub::new();
        hub.upload_poster(POSTER).unwrap();
        let sid = hub.create_session("macbeth").unwrap();
        (hub, sid)
    }

    fn placed(ts: u64, token: TokenKind, c: u8, r: u8) -> TokenEvent {
        TokenEvent::placed(ts, token, CellCoord::new(c, r).unwrap())
    }

    fn drain(rx: &mut UnboundedReceiver<ServerMessage>) -> Vec<ServerMessage> {
        std::iter::from_fn(|| rx.try_recv().ok()).collect()
    }

    #[test]
    fn zoom_yields_one_state_message() {
        let (hub, sid) = hub();
        let (tx, mut rx) = unbounded_channel();
        hub.subscribe(&sid, tx).unwrap();
        assert!(matches!(
            drain(&mut rx).as_slice(),
            [ServerMessage::State { seq: 0, .. }]
        ));
        let ack = hub.post_event(&sid, placed(5, TokenKind::Zoomer, 0, 0)).unwrap();
        assert_eq!(ack.seq, 1);
        let msgs = drain(&mut rx);
        assert_eq!(msgs.len(), 1);
        let ServerMessage::State { seq, board, .. } = &msgs[0] else {
            panic!("expected state, got {msgs:?}");
        };
        assert_eq!(*seq, 1);
        let witches = board.objects.iter().find(|o| o.id.as_str() == "witches").unwrap();
        assert_eq!(witches.rect, Rect::FULL);
    }

    #[test]
    fn unknown_session_and_poster() {
        let (hub, _) = hub();
        assert!(matches!(
            hub.post_event("s99", placed(0, TokenKind::Undoer, 0, 0)),
            Err(ServiceError::UnknownSession(_))
        ));
        assert!(matches!(
            hub.create_session("hamlet"),
            Err(ServiceError::UnknownPoster(_))
        ));
        let (tx, _rx) = unbounded_channel();
        assert!(hub.subscribe("nope", tx).is_err());
    }

    #[test]
    fn fan_out_is_identical() {
        let (hub, sid) = hub();
        let (tx1, mut rx1) = unbounded_channel();
        let (tx2, mut rx2) = unbounded_channel();
        hub.subscribe(&sid, tx1).unwrap();
        hub.subscribe(&sid, tx2).unwrap();
        drain(&mut rx1);
        drain(&mut rx2);
        hub.post_event(&sid, placed(0, TokenKind::Player1, 0, 0)).unwrap();
        let a = drain(&mut rx1);
        let b = drain(&mut rx2);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(matches!(a[1], ServerMessage::Playback { seq: 1, .. }));
    }

    #[test]
    fn signal_only_when_board_unchanged() {
        let (hub, sid) = hub();
        let (tx, mut rx) = unbounded_channel();
        hub.subscribe(&sid, tx).unwrap();
        drain(&mut rx);
        // Lift of a token that is not resting anywhere changes nothing.
        hub.post_event(
            &sid,
            TokenEvent::lifted(0, TokenKind::Mover, CellCoord::new(3, 3).unwrap()),
        )
        .unwrap();
        let msgs = drain(&mut rx);
        assert!(matches!(msgs.as_slice(), [ServerMessage::Signal { seq: 1, signals, .. }] if signals.is_empty()));
    }

    #[test]
    fn malformed_messages_leave_session_untouched() {
        let (hub, sid) = hub();
        let before = hub.state(&sid).unwrap();
        let reply = hub.handle_text(&sid, r#"{"type":"token_event","ts_ms":1,"token":"Mover"}"#);
        assert!(matches!(reply, ServerMessage::Error { ref code, .. } if code == "Malformed"));
        assert_eq!(hub.state(&sid).unwrap(), before);
        let reply = hub.handle_text(&sid, r#"{"type":"media_ended","object_id":"ghost"}"#);
        assert!(matches!(reply, ServerMessage::Ack { seq: 1, .. }));
    }

    #[test]
    fn timestamps_must_not_go_backwards() {
        let (hub, sid) = hub();
        hub.post_event(&sid, placed(100, TokenKind::Undoer, 0, 0)).unwrap();
        let err = hub.post_event(&sid, placed(50, TokenKind::Undoer, 0, 0)).unwrap_err();
        assert_eq!(err.code(), "NonMonotonicTimestamp");
    }

    #[test]
    fn media_round_trip_and_late_end() {
        let (hub, sid) = hub();
        let (tx, mut rx) = unbounded_channel();
        hub.subscribe(&sid, tx).unwrap();
        drain(&mut rx);
        hub.post_event(&sid, placed(0, TokenKind::Player1, 0, 0)).unwrap();
        drain(&mut rx);
        hub.media_ended(&sid, &"witches".into()).unwrap();
        let msgs = drain(&mut rx);
        let ServerMessage::State { board, .. } = &msgs[0] else {
            panic!("expected state");
        };
        assert!(board.objects.iter().all(|o| o.playing.is_none()));
        hub.media_ended(&sid, &"witches".into()).unwrap();
        assert!(drain(&mut rx).is_empty());
    }

    #[test]
    fn save_and_restore_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let hub = Hub::with_layout_dir(dir.path());
        hub.upload_poster(POSTER).unwrap();
        let sid = hub.create_session("macbeth").unwrap();
        hub.save_layout(&sid, "opening").unwrap();
        assert!(dir.path().join(&sid).join("opening.json").exists());
        hub.post_event(&sid, placed(0, TokenKind::Eraser, 0, 0)).unwrap();
        hub.post_event(&sid, placed(1, TokenKind::Player1, 0, 0)).unwrap();
        let (tx, mut rx) = unbounded_channel();
        hub.subscribe(&sid, tx).unwrap();
        drain(&mut rx);
        hub.restore_layout(&sid, "opening").unwrap();
        let msgs = drain(&mut rx);
        let ServerMessage::State { board, .. } = &msgs[0] else {
            panic!("expected state");
        };
        assert_eq!(board.objects.len(), 2);
        assert_eq!(board.undo_depth, 0);
        assert!(matches!(
            hub.restore_layout(&sid, "missing"),
            Err(ServiceError::UnknownLayout(_))
        ));
        assert!(matches!(
            hub.save_layout(&sid, "../etc"),
            Err(ServiceError::InvalidLayoutName(_))
        ));
    }
}
