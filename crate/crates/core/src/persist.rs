//! Poster manifests, layout snapshots and the canonical board view.
//!
//! A manifest binds each object's image to its audio/video components and
//! may carry an initial layout. Layout itself is only ever arranged on the
//! board; snapshots capture and restore an arrangement as-is.
//!
//! All documents are UTF-8 JSON. Canonical output is pretty-printed with a
//! trailing newline; manifest objects are sorted by id, snapshot entries
//! stay in back-to-front order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{PendingGesture, TokenKind};
use crate::model::{Board, CellCoord, MediaObject, ObjectId, ObjectSpec, Rect, BOARD_SIZE, MAX_AV_CHANNELS};
use crate::playback::{self, PlaybackCommand};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosterManifest {
    pub poster_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_layout: Option<LayoutSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSnapshot {
    pub name: String,
    /// Back-to-front.
    #[serde(default)]
    pub entries: Vec<LayoutEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutEntry {
    pub object_id: ObjectId,
    pub rect: Rect,
    /// Pre-zoom rect when the object is zoomed.
    #[serde(default)]
    pub zoomed: Option<Rect>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest is not valid JSON for this schema: {0}")]
    Syntax(serde_json::Error),
    #[error("object id `{0}` is declared more than once")]
    DuplicateId(ObjectId),
    #[error("object `{id}` binds {count} AV channels; at most 2 are allowed")]
    TooManyChannels { id: ObjectId, count: usize },
    #[error("initial layout names undeclared object `{0}`")]
    DanglingLayoutRef(ObjectId),
    #[error("initial layout is invalid: {0}")]
    Layout(SnapshotError),
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot is not valid JSON for this schema: {0}")]
    Syntax(serde_json::Error),
    #[error("object `{0}` appears more than once in the snapshot")]
    DuplicateEntry(ObjectId),
    #[error("object `{0}` is marked zoomed but does not cover the whole board")]
    ZoomedNotFull(ObjectId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RestoreError {
    #[error("snapshot names object `{0}`, which this poster does not declare")]
    UnknownObjectInSnapshot(ObjectId),
    #[error("snapshot names object `{0}` twice")]
    DuplicateEntry(ObjectId),
    #[error("object `{0}` is marked zoomed but does not cover the whole board")]
    ZoomedNotFull(ObjectId),
}

impl From<serde_json::Error> for ManifestError {
    fn from(e: serde_json::Error) -> Self {
        ManifestError::Syntax(e)
    }
}

impl From<serde_json::Error> for SnapshotError {
    fn from(e: serde_json::Error) -> Self {
        SnapshotError::Syntax(e)
    }
}

impl LayoutSnapshot {
    /// Checks id uniqueness and zoom consistency.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        let mut seen = BTreeSet::new();
        for entry in &self.entries {
            if !seen.insert(&entry.object_id) {
                return Err(SnapshotError::DuplicateEntry(entry.object_id.clone()));
            }
            if entry.zoomed.is_some() && !entry.rect.is_full_board() {
                return Err(SnapshotError::ZoomedNotFull(entry.object_id.clone()));
            }
        }
        Ok(())
    }
}

impl PosterManifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        let mut ids = BTreeSet::new();
        for obj in &self.objects {
            if !ids.insert(&obj.id) {
                return Err(ManifestError::DuplicateId(obj.id.clone()));
            }
            if obj.av_channels.len() > MAX_AV_CHANNELS {
                return Err(ManifestError::TooManyChannels {
                    id: obj.id.clone(),
                    count: obj.av_channels.len(),
                });
            }
        }
        if let Some(layout) = &self.initial_layout {
            layout.validate().map_err(ManifestError::Layout)?;
            if let Some(missing) = layout.entries.iter().find(|e| !ids.contains(&e.object_id)) {
                return Err(ManifestError::DanglingLayoutRef(missing.object_id.clone()));
            }
        }
        Ok(())
    }
}

pub fn parse_manifest(text: &str) -> Result<PosterManifest, ManifestError> {
    let manifest: PosterManifest = serde_json::from_str(text)?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn parse_snapshot(text: &str) -> Result<LayoutSnapshot, SnapshotError> {
    let snapshot: LayoutSnapshot = serde_json::from_str(text)?;
    snapshot.validate()?;
    Ok(snapshot)
}

/// Canonical manifest text: objects sorted by id.
pub fn manifest_to_json(manifest: &PosterManifest) -> String {
    let mut canonical = manifest.clone();
    canonical.objects.sort_by(|a, b| a.id.cmp(&b.id));
    to_pretty(&canonical)
}

pub fn snapshot_to_json(snapshot: &LayoutSnapshot) -> String {
    to_pretty(snapshot)
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("document types always serialize");
    text.push('\n');
    text
}

/// A freshly loaded board plus any objects that did not fit.
#[derive(Debug, Clone)]
pub struct LoadedPoster {
    pub board: Board,
    /// Declared but not shown, in declaration order.
    pub off_board: Vec<ObjectId>,
}

/// Builds the board for a validated manifest.
///
/// Without an initial layout, objects are placed as 1×1 tiles in
/// declaration order, row-major from the top-left cell; anything past the
/// 64th object stays off-board.
pub fn load_poster(manifest: &PosterManifest) -> LoadedPoster {
    let mut board = Board::new(manifest.poster_id.clone(), manifest.objects.clone());
    let placed: Vec<MediaObject> = match &manifest.initial_layout {
        Some(layout) => layout
            .entries
            .iter()
            .map(|entry| {
                let spec = board.spec(&entry.object_id).expect("manifest validated");
                let mut obj = MediaObject::from_spec(spec, entry.rect);
                obj.zoom_saved = entry.zoomed;
                obj
            })
            .collect(),
        None => manifest
            .objects
            .iter()
            .zip(CellCoord::all())
            .map(|(spec, cell)| {
                MediaObject::from_spec(spec, Rect::new(cell.col(), cell.row(), 1, 1).expect("1x1 fits"))
            })
            .collect(),
    };
    board.replace_arrangement(placed);
    let off_board = board.off_board();
    LoadedPoster { board, off_board }
}

/// Captures rects, zoom state and z-order. The board is untouched.
pub fn save_layout(board: &Board, name: impl Into<String>) -> LayoutSnapshot {
    LayoutSnapshot {
        name: name.into(),
        entries: board
            .objects_back_to_front()
            .map(|o| LayoutEntry {
                object_id: o.id.clone(),
                rect: o.rect,
                zoomed: o.zoom_saved,
            })
            .collect(),
    }
}

/// Makes the board show exactly the snapshot's arrangement.
///
/// All playback stops (the returned commands), the undo history is dropped
/// and any half-finished gesture is cancelled. Objects the snapshot omits
/// go off-board. On error the board is left unchanged.
pub fn restore_layout(board: &mut Board, snapshot: &LayoutSnapshot) -> Result<Vec<PlaybackCommand>, RestoreError> {
    let mut seen = BTreeSet::new();
    let mut arranged = Vec::with_capacity(snapshot.entries.len());
    for entry in &snapshot.entries {
        let spec = board
            .spec(&entry.object_id)
            .ok_or_else(|| RestoreError::UnknownObjectInSnapshot(entry.object_id.clone()))?;
        if !seen.insert(&entry.object_id) {
            return Err(RestoreError::DuplicateEntry(entry.object_id.clone()));
        }
        if entry.zoomed.is_some() && !entry.rect.is_full_board() {
            return Err(RestoreError::ZoomedNotFull(entry.object_id.clone()));
        }
        let mut obj = MediaObject::from_spec(spec, entry.rect);
        obj.zoom_saved = entry.zoomed;
        arranged.push(obj);
    }
    let stops = playback::stop_all(board);
    board.replace_arrangement(arranged);
    Ok(stops)
}

/// Canonical serialization of a live board, as sent to renderers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardView {
    pub poster_id: String,
    pub cols: u8,
    pub rows: u8,
    /// Back-to-front.
    pub objects: Vec<MediaObject>,
    pub off_board: Vec<ObjectId>,
    pub pending: Option<PendingGesture>,
    pub tokens: Vec<RestingToken>,
    pub undo_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestingToken {
    pub token: TokenKind,
    pub col: u8,
    pub row: u8,
}

impl BoardView {
    pub fn of(board: &Board) -> Self {
        BoardView {
            poster_id: board.poster_id().to_owned(),
            cols: BOARD_SIZE,
            rows: BOARD_SIZE,
            objects: board.objects_back_to_front().cloned().collect(),
            off_board: board.off_board(),
            pending: board.pending().cloned(),
            tokens: board
                .resting_tokens()
                .iter()
                .map(|(&token, cell)| RestingToken {
                    token,
                    col: cell.col(),
                    row: cell.row(),
                })
                .collect(),
            undo_depth: board.undo_stack().len(),
        }
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }
}
