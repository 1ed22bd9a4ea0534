//! Token gesture grammar.
//!
//! Turns the stream of token placements and lifts reported by the antenna
//! into board operations. Most tokens take a single operand: the object
//! under the cell where they are placed. The Mover and Resizer take two
//! placements: first on the object, then on the destination.
//!
//! Lifts carry no meaning beyond presence tracking; a physical token has to
//! be picked up between the two halves of a move.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::devlog::LogRecord;
use crate::model::{Board, CellCoord, Change, Channel, Edge, ObjectId, Rect, ZoomChange};
use crate::playback::{self, PlaybackCommand, StopTarget};
use crate::signal::{Signal, SignalCode};

/// The eight physical tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Eraser,
    Mover,
    Player1,
    Player2,
    Resizer,
    Stopper,
    Undoer,
    Zoomer,
}

impl TokenKind {
    pub const ALL: [TokenKind; 8] = [
        TokenKind::Eraser,
        TokenKind::Mover,
        TokenKind::Player1,
        TokenKind::Player2,
        TokenKind::Resizer,
        TokenKind::Stopper,
        TokenKind::Undoer,
        TokenKind::Zoomer,
    ];

    /// Label printed on the token cap.
    pub fn label(self) -> &'static str {
        match self {
            TokenKind::Eraser => "Eraser",
            TokenKind::Mover => "Mover",
            TokenKind::Player1 => "Player 1",
            TokenKind::Player2 => "Player 2",
            TokenKind::Resizer => "Resizer",
            TokenKind::Stopper => "Stopper",
            TokenKind::Undoer => "Undoer",
            TokenKind::Zoomer => "Zoomer",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Placed,
    Lifted,
}

/// One antenna report: a token placed on or lifted from a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LogRecord", into = "LogRecord")]
pub struct TokenEvent {
    pub ts_ms: u64,
    pub token: TokenKind,
    pub phase: Phase,
    pub cell: CellCoord,
}

impl TokenEvent {
    pub fn placed(ts_ms: u64, token: TokenKind, cell: CellCoord) -> Self {
        TokenEvent {
            ts_ms,
            token,
            phase: Phase::Placed,
            cell,
        }
    }

    pub fn lifted(ts_ms: u64, token: TokenKind, cell: CellCoord) -> Self {
        TokenEvent {
            ts_ms,
            token,
            phase: Phase::Lifted,
            cell,
        }
    }
}

/// First half of a two-placement gesture, waiting for its second placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PendingGesture {
    /// `anchor` is the grabbed cell's offset from the object's origin.
    MoveAwaitingTarget { object_id: ObjectId, anchor: (u8, u8) },
    ResizeAwaitingTarget {
        object_id: ObjectId,
        candidate_edges: Vec<Edge>,
    },
}

impl PendingGesture {
    pub fn object_id(&self) -> &ObjectId {
        match self {
            PendingGesture::MoveAwaitingTarget { object_id, .. }
            | PendingGesture::ResizeAwaitingTarget { object_id, .. } => object_id,
        }
    }

    pub fn token(&self) -> TokenKind {
        match self {
            PendingGesture::MoveAwaitingTarget { .. } => TokenKind::Mover,
            PendingGesture::ResizeAwaitingTarget { .. } => TokenKind::Resizer,
        }
    }
}

/// A gesture that reached its effect, or a sanctioned no-op.
/// These are the units counted by usage analytics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletedOp {
    pub ts_ms: u64,
    pub token: TokenKind,
    /// Absent for board-wide operations (undo, stop-all).
    pub object_id: Option<ObjectId>,
}

/// Everything one event produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub signals: Vec<Signal>,
    pub commands: Vec<PlaybackCommand>,
    pub completed: Option<CompletedOp>,
}

impl Outcome {
    fn signal(&mut self, code: SignalCode, detail: impl Into<String>) {
        self.signals.push(Signal::new(code, detail));
    }

    fn complete(&mut self, event: &TokenEvent, object_id: Option<ObjectId>, detail: impl Into<String>) {
        self.signal(SignalCode::OpCompleted, detail);
        self.completed = Some(CompletedOp {
            ts_ms: event.ts_ms,
            token: event.token,
            object_id,
        });
    }
}

/// Result of the second Resizer placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeChoice {
    Apply {
        edge: Edge,
        line: i64,
    },
    /// Every valid candidate has zero displacement.
    NoOp,
    /// No candidate edge can reach the target line.
    Invalid,
}

/// Picks which border edge a second Resizer placement at `cell` drags.
///
/// Candidates that give an invalid rect are dropped; among the rest the
/// largest displacement wins, ties going to the earlier edge in
/// left, right, top, bottom order.
pub fn choose_resize(rect: Rect, candidates: &[Edge], cell: CellCoord) -> ResizeChoice {
    let mut any_valid = false;
    let mut best: Option<(Edge, i64, i64)> = None;
    for &edge in Edge::ALL.iter().filter(|e| candidates.contains(e)) {
        let line = i64::from(if edge.is_horizontal_axis() {
            cell.col()
        } else {
            cell.row()
        });
        if rect.with_edge_at(edge, line).is_err() {
            continue;
        }
        any_valid = true;
        let shift = rect.edge_displacement(edge, line).abs();
        if shift > 0 && best.is_none_or(|(_, _, b)| shift > b) {
            best = Some((edge, line, shift));
        }
    }
    match best {
        Some((edge, line, _)) => ResizeChoice::Apply { edge, line },
        None if any_valid => ResizeChoice::NoOp,
        None => ResizeChoice::Invalid,
    }
}

/// Interprets one antenna event against the board.
pub fn consume(board: &mut Board, event: &TokenEvent) -> Outcome {
    let mut out = Outcome::default();
    if event.phase == Phase::Lifted {
        if board.resting_tokens().get(&event.token) == Some(&event.cell) {
            board.set_resting(event.token, None);
        }
        return out;
    }
    board.set_resting(event.token, Some(event.cell));

    let pending = board.take_pending();
    let pending = match pending {
        Some(p) if p.token() != event.token => {
            out.signal(
                SignalCode::GestureCancelled,
                format!(
                    "{} gesture on `{}` cancelled by {}",
                    p.token(),
                    p.object_id(),
                    event.token
                ),
            );
            None
        }
        other => other,
    };

    let cell = event.cell;
    let target = board.topmost_at(cell).cloned();
    match event.token {
        TokenKind::Mover => match pending {
            Some(PendingGesture::MoveAwaitingTarget { object_id, anchor }) => {
                finish_move(board, event, object_id, anchor, &mut out)
            }
            _ => match target {
                Some(id) => {
                    let origin = board.object(&id).expect("topmost is on board").rect.origin();
                    let anchor = (cell.col() - origin.col(), cell.row() - origin.row());
                    board.set_pending(Some(PendingGesture::MoveAwaitingTarget { object_id: id, anchor }));
                }
                None => not_on_object(&mut out, event),
            },
        },
        TokenKind::Resizer => match pending {
            Some(PendingGesture::ResizeAwaitingTarget {
                object_id,
                candidate_edges,
            }) => finish_resize(board, event, object_id, &candidate_edges, &mut out),
            _ => match target {
                Some(id) => {
                    let rect = board.object(&id).expect("topmost is on board").rect;
                    let edges = rect.edges_at(cell);
                    if edges.is_empty() {
                        out.signal(
                            SignalCode::NotOnBorder,
                            format!("{cell} is inside `{id}`, not on its border"),
                        );
                    } else {
                        board.set_pending(Some(PendingGesture::ResizeAwaitingTarget {
                            object_id: id,
                            candidate_edges: edges,
                        }));
                    }
                }
                None => not_on_object(&mut out, event),
            },
        },
        TokenKind::Player1 | TokenKind::Player2 => match target {
            Some(id) => {
                let channel = if event.token == TokenKind::Player1 {
                    Channel::One
                } else {
                    Channel::Two
                };
                let played = playback::play(board, &id, channel).expect("topmost is on board");
                let started = !played.commands.is_empty();
                out.signals.extend(played.signals);
                out.commands.extend(played.commands);
                if started {
                    out.complete(event, Some(id.clone()), format!("`{id}` playing channel {channel}"));
                }
            }
            None => not_on_object(&mut out, event),
        },
        TokenKind::Stopper => {
            let stop_target = match &target {
                Some(id) => StopTarget::Object(id),
                None => StopTarget::All,
            };
            let stopped = playback::stop(board, stop_target).expect("topmost is on board");
            let any = !stopped.commands.is_empty();
            out.signals.extend(stopped.signals);
            out.commands.extend(stopped.commands);
            if any {
                let detail = match &target {
                    Some(id) => format!("`{id}` stopped"),
                    None => "all playback stopped".to_owned(),
                };
                out.complete(event, target, detail);
            }
        }
        TokenKind::Zoomer => match target {
            Some(id) => {
                let change = board.zoom_toggle(&id).expect("topmost is on board");
                let detail = match change {
                    ZoomChange::ZoomedIn => format!("`{id}` zoomed to full board"),
                    ZoomChange::Restored => format!("`{id}` restored"),
                };
                out.complete(event, Some(id), detail);
            }
            None => not_on_object(&mut out, event),
        },
        TokenKind::Eraser => match target {
            Some(id) => {
                let stop = board.erase_object(&id).expect("topmost is on board");
                out.commands.extend(stop);
                out.complete(event, Some(id.clone()), format!("`{id}` erased"));
            }
            None => not_on_object(&mut out, event),
        },
        TokenKind::Undoer => match board.undo() {
            Some(kind) => out.complete(event, None, format!("undid {kind:?}").to_lowercase()),
            None => out.signal(SignalCode::EmptyUndo, "nothing to undo"),
        },
    }
    out
}

fn not_on_object(out: &mut Outcome, event: &TokenEvent) {
    out.signal(
        SignalCode::NotOnObject,
        format!("{} placed on empty cell {}", event.token, event.cell),
    );
}

fn finish_move(board: &mut Board, event: &TokenEvent, id: ObjectId, anchor: (u8, u8), out: &mut Outcome) {
    let rect = board.object(&id).expect("pending target is on board").rect;
    let col = i64::from(event.cell.col()) - i64::from(anchor.0);
    let row = i64::from(event.cell.row()) - i64::from(anchor.1);
    let Ok(dest) = rect.with_origin(col, row) else {
        out.signal(
            SignalCode::DestinationOutOfBounds,
            format!("`{id}` would leave the board at origin ({col},{row})"),
        );
        board.set_pending(Some(PendingGesture::MoveAwaitingTarget { object_id: id, anchor }));
        return;
    };
    let change = board.move_object(&id, dest.origin()).expect("destination validated");
    let detail = match change {
        Change::Applied => format!("`{id}` moved to {}", dest.origin()),
        Change::Unchanged => format!("`{id}` already at {}", dest.origin()),
    };
    out.complete(event, Some(id), detail);
}

fn finish_resize(board: &mut Board, event: &TokenEvent, id: ObjectId, edges: &[Edge], out: &mut Outcome) {
    let rect = board.object(&id).expect("pending target is on board").rect;
    match choose_resize(rect, edges, event.cell) {
        ResizeChoice::Apply { edge, line } => {
            board.resize_object(&id, edge, line).expect("choice validated");
            let now = board.object(&id).expect("still on board").rect;
            out.complete(event, Some(id), format!("resized via {edge:?} edge to {now}"));
        }
        ResizeChoice::NoOp => out.complete(event, Some(id.clone()), format!("`{id}` size unchanged")),
        ResizeChoice::Invalid => out.signal(
            SignalCode::InvalidResizeTarget,
            format!("{} cannot be reached from the selected border of `{id}`", event.cell),
        ),
    }
}
