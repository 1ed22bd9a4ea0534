//! The board: an 8×8 grid of cells holding rectangular media objects.
//!
//! Objects are aligned to cell boundaries and stacked in a back-to-front
//! z-order. Every repositioning or rescaling brings the object to the
//! front. Moves, resizes and erasures are undoable; zooms are not.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gesture::{PendingGesture, TokenKind};
use crate::playback::{PlaybackAction, PlaybackCommand};

/// Number of cells along each side of the board.
pub const BOARD_SIZE: u8 = 8;

/// One square of the board grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCell")]
pub struct CellCoord {
    col: u8,
    row: u8,
}

#[derive(Deserialize)]
struct RawCell {
    col: i64,
    row: i64,
}

impl TryFrom<RawCell> for CellCoord {
    type Error = GeometryError;

    fn try_from(raw: RawCell) -> Result<Self, Self::Error> {
        CellCoord::from_signed(raw.col, raw.row)
    }
}

impl CellCoord {
    pub fn new(col: u8, row: u8) -> Result<Self, GeometryError> {
        Self::from_signed(col.into(), row.into())
    }

    /// Builds a cell from possibly negative or oversized indices.
    pub fn from_signed(col: i64, row: i64) -> Result<Self, GeometryError> {
        let size = i64::from(BOARD_SIZE);
        if (0..size).contains(&col) && (0..size).contains(&row) {
            Ok(CellCoord {
                col: col as u8,
                row: row as u8,
            })
        } else {
            Err(GeometryError::CellOutOfRange { col, row })
        }
    }

    pub fn col(self) -> u8 {
        self.col
    }

    pub fn row(self) -> u8 {
        self.row
    }

    /// All 64 cells in row-major order.
    pub fn all() -> impl Iterator<Item = CellCoord> {
        (0..BOARD_SIZE).flat_map(|row| (0..BOARD_SIZE).map(move |col| CellCoord { col, row }))
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("cell ({col},{row}) is outside the 8x8 board")]
    CellOutOfRange { col: i64, row: i64 },
    #[error("rect at ({col},{row}) sized {width}x{height} does not fit on the board")]
    RectOutOfRange {
        col: i64,
        row: i64,
        width: i64,
        height: i64,
    },
}

/// One of the four sides of a rect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
    Top,
    Bottom,
}

impl Edge {
    /// All edges, in resize tie-break priority order.
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Top, Edge::Bottom];

    pub fn is_horizontal_axis(self) -> bool {
        matches!(self, Edge::Left | Edge::Right)
    }
}

/// A cell-aligned rectangle that lies entirely on the board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRect", into = "RawRect")]
pub struct Rect {
    origin: CellCoord,
    width: u8,
    height: u8,
}

#[derive(Serialize, Deserialize)]
struct RawRect {
    col: i64,
    row: i64,
    w: i64,
    h: i64,
}

impl TryFrom<RawRect> for Rect {
    type Error = GeometryError;

    fn try_from(raw: RawRect) -> Result<Self, Self::Error> {
        Rect::from_signed(raw.col, raw.row, raw.w, raw.h)
    }
}

impl From<Rect> for RawRect {
    fn from(rect: Rect) -> Self {
        RawRect {
            col: rect.origin.col.into(),
            row: rect.origin.row.into(),
            w: rect.width.into(),
            h: rect.height.into(),
        }
    }
}

impl Rect {
    /// The whole board.
    pub const FULL: Rect = Rect {
        origin: CellCoord { col: 0, row: 0 },
        width: BOARD_SIZE,
        height: BOARD_SIZE,
    };

    pub fn new(col: u8, row: u8, width: u8, height: u8) -> Result<Self, GeometryError> {
        Self::from_signed(col.into(), row.into(), width.into(), height.into())
    }

    pub fn from_signed(col: i64, row: i64, width: i64, height: i64) -> Result<Self, GeometryError> {
        let size = i64::from(BOARD_SIZE);
        let fits = col >= 0
            && row >= 0
            && (1..=size).contains(&width)
            && (1..=size).contains(&height)
            && col + width <= size
            && row + height <= size;
        if !fits {
            return Err(GeometryError::RectOutOfRange {
                col,
                row,
                width,
                height,
            });
        }
        Ok(Rect {
            origin: CellCoord {
                col: col as u8,
                row: row as u8,
            },
            width: width as u8,
            height: height as u8,
        })
    }

    pub fn origin(self) -> CellCoord {
        self.origin
    }

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn height(self) -> u8 {
        self.height
    }

    /// Index of the rightmost column covered.
    pub fn last_col(self) -> u8 {
        self.origin.col + self.width - 1
    }

    /// Index of the bottom row covered.
    pub fn last_row(self) -> u8 {
        self.origin.row + self.height - 1
    }

    pub fn is_full_board(self) -> bool {
        self == Rect::FULL
    }

    pub fn contains(self, cell: CellCoord) -> bool {
        (self.origin.col..=self.last_col()).contains(&cell.col)
            && (self.origin.row..=self.last_row()).contains(&cell.row)
    }

    /// Same size, placed at a new (possibly invalid) origin.
    pub fn with_origin(self, col: i64, row: i64) -> Result<Rect, GeometryError> {
        Rect::from_signed(col, row, self.width.into(), self.height.into())
    }

    /// Edges of this rect that `cell` lies on. Empty for interior or outside cells.
    pub fn edges_at(self, cell: CellCoord) -> Vec<Edge> {
        if !self.contains(cell) {
            return Vec::new();
        }
        Edge::ALL
            .into_iter()
            .filter(|edge| match edge {
                Edge::Left => cell.col == self.origin.col,
                Edge::Right => cell.col == self.last_col(),
                Edge::Top => cell.row == self.origin.row,
                Edge::Bottom => cell.row == self.last_row(),
            })
            .collect()
    }

    /// Signed distance the named edge travels to reach `line`.
    pub fn edge_displacement(self, edge: Edge, line: i64) -> i64 {
        let current = match edge {
            Edge::Left => self.origin.col,
            Edge::Right => self.last_col(),
            Edge::Top => self.origin.row,
            Edge::Bottom => self.last_row(),
        };
        line - i64::from(current)
    }

    /// Moves one edge so that its boundary cell index becomes `line`,
    /// keeping the opposite edge fixed.
    pub fn with_edge_at(self, edge: Edge, line: i64) -> Result<Rect, GeometryError> {
        let (col, row) = (i64::from(self.origin.col), i64::from(self.origin.row));
        let (last_col, last_row) = (i64::from(self.last_col()), i64::from(self.last_row()));
        let (w, h) = (i64::from(self.width), i64::from(self.height));
        match edge {
            Edge::Left => Rect::from_signed(line, row, last_col - line + 1, h),
            Edge::Right => Rect::from_signed(col, row, line - col + 1, h),
            Edge::Top => Rect::from_signed(col, line, w, last_row - line + 1),
            Edge::Bottom => Rect::from_signed(col, row, w, line - row + 1),
        }
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}x{}", self.origin, self.width, self.height)
    }
}

/// Opaque unique identifier of a media object within a poster.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> Self {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AvKind {
    Audio,
    Video,
}

/// An audio or video clip bound to a media object.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvComponent {
    pub kind: AvKind,
    pub media_ref: String,
}

/// Player channel selector: `1` or `2` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Channel {
    One,
    Two,
}

impl Channel {
    /// Zero-based position in `av_channels`.
    pub fn index(self) -> usize {
        match self {
            Channel::One => 0,
            Channel::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl TryFrom<u8> for Channel {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(Channel::One),
            2 => Ok(Channel::Two),
            other => Err(format!("channel must be 1 or 2, got {other}")),
        }
    }
}

impl From<Channel> for u8 {
    fn from(c: Channel) -> u8 {
        c.number()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Maximum number of AV components an object may carry.
pub const MAX_AV_CHANNELS: usize = 2;

/// The bound components of a poster element, independent of where it sits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub id: ObjectId,
    pub image_ref: String,
    #[serde(default)]
    pub av_channels: Vec<AvComponent>,
}

/// A poster element placed on the board.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaObject {
    pub id: ObjectId,
    pub image_ref: String,
    pub av_channels: Vec<AvComponent>,
    pub rect: Rect,
    /// Pre-zoom rect; present exactly when the object is zoomed.
    #[serde(rename = "zoomed")]
    pub zoom_saved: Option<Rect>,
    pub playing: Option<Channel>,
}

impl MediaObject {
    pub fn from_spec(spec: &ObjectSpec, rect: Rect) -> Self {
        MediaObject {
            id: spec.id.clone(),
            image_ref: spec.image_ref.clone(),
            av_channels: spec.av_channels.clone(),
            rect,
            zoom_saved: None,
            playing: None,
        }
    }

    pub fn is_zoomed(&self) -> bool {
        self.zoom_saved.is_some()
    }

    pub fn channel(&self, channel: Channel) -> Option<&AvComponent> {
        self.av_channels.get(channel.index())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UndoKind {
    Move,
    Resize,
    Erase,
}

/// Everything needed to reverse one move, resize or erase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndoRecord {
    pub kind: UndoKind,
    pub object_id: ObjectId,
    pub prior_object: MediaObject,
    pub prior_z_order: Vec<ObjectId>,
}

/// Whether an operation changed the board.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Change {
    Applied,
    /// Zero displacement; board untouched.
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoomChange {
    ZoomedIn,
    Restored,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("no object `{0}` on the board")]
    UnknownObject(ObjectId),
    #[error("moving `{id}` to {origin} would leave the board")]
    OutOfBounds { id: ObjectId, origin: CellCoord },
    #[error("resizing `{id}` ({edge:?} edge to line {line}) gives an invalid rect")]
    InvalidResize { id: ObjectId, edge: Edge, line: i64 },
}

/// A broken board invariant, reported by [`Board::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("board invariant violated: {0}")]
pub struct InvariantViolation(pub String);

/// The live poster state.
///
/// Fields are private: all mutation goes through the operations below, the
/// gesture interpreter, the playback controller, or layout restore.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    poster_id: String,
    catalog: Vec<ObjectSpec>,
    objects: BTreeMap<ObjectId, MediaObject>,
    z_order: Vec<ObjectId>,
    undo_stack: Vec<UndoRecord>,
    pending: Option<PendingGesture>,
    resting: BTreeMap<TokenKind, CellCoord>,
}

impl Board {
    /// An empty board that knows the given poster objects but shows none of them.
    pub fn new(poster_id: impl Into<String>, catalog: Vec<ObjectSpec>) -> Self {
        Board {
            poster_id: poster_id.into(),
            catalog,
            objects: BTreeMap::new(),
            z_order: Vec::new(),
            undo_stack: Vec::new(),
            pending: None,
            resting: BTreeMap::new(),
        }
    }

    pub fn poster_id(&self) -> &str {
        &self.poster_id
    }

    /// Every object the poster declares, on-board or not, in declaration order.
    pub fn catalog(&self) -> &[ObjectSpec] {
        &self.catalog
    }

    pub fn spec(&self, id: &ObjectId) -> Option<&ObjectSpec> {
        self.catalog.iter().find(|s| &s.id == id)
    }

    pub fn object(&self, id: &ObjectId) -> Option<&MediaObject> {
        self.objects.get(id)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Back-to-front.
    pub fn z_order(&self) -> &[ObjectId] {
        &self.z_order
    }

    /// On-board objects, back-to-front.
    pub fn objects_back_to_front(&self) -> impl Iterator<Item = &MediaObject> {
        self.z_order.iter().map(|id| &self.objects[id])
    }

    /// Declared objects not currently on the board, in declaration order.
    pub fn off_board(&self) -> Vec<ObjectId> {
        self.catalog
            .iter()
            .filter(|s| !self.objects.contains_key(&s.id))
            .map(|s| s.id.clone())
            .collect()
    }

    pub fn undo_stack(&self) -> &[UndoRecord] {
        &self.undo_stack
    }

    pub fn pending(&self) -> Option<&PendingGesture> {
        self.pending.as_ref()
    }

    /// Tokens currently resting on the board, as last reported by the antenna.
    pub fn resting_tokens(&self) -> &BTreeMap<TokenKind, CellCoord> {
        &self.resting
    }

    /// Frontmost object covering `cell`.
    pub fn topmost_at(&self, cell: CellCoord) -> Option<&ObjectId> {
        self.z_order
            .iter()
            .rev()
            .find(|id| self.objects[*id].rect.contains(cell))
    }

    pub fn move_object(&mut self, id: &ObjectId, new_origin: CellCoord) -> Result<Change, ModelError> {
        let obj = self.require(id)?;
        let rect = obj
            .rect
            .with_origin(new_origin.col.into(), new_origin.row.into())
            .map_err(|_| ModelError::OutOfBounds {
                id: id.clone(),
                origin: new_origin,
            })?;
        if rect == obj.rect {
            return Ok(Change::Unchanged);
        }
        self.push_undo(UndoKind::Move, id);
        let obj = self.objects.get_mut(id).expect("checked above");
        obj.rect = rect;
        obj.zoom_saved = None;
        self.bring_to_front(id);
        Ok(Change::Applied)
    }

    /// Moves `edge` of the object so its boundary cell index becomes
    /// `target_line`; the opposite edge stays put.
    pub fn resize_object(&mut self, id: &ObjectId, edge: Edge, target_line: i64) -> Result<Change, ModelError> {
        let obj = self.require(id)?;
        let rect = obj
            .rect
            .with_edge_at(edge, target_line)
            .map_err(|_| ModelError::InvalidResize {
                id: id.clone(),
                edge,
                line: target_line,
            })?;
        if rect == obj.rect {
            return Ok(Change::Unchanged);
        }
        self.push_undo(UndoKind::Resize, id);
        let obj = self.objects.get_mut(id).expect("checked above");
        obj.rect = rect;
        obj.zoom_saved = None;
        self.bring_to_front(id);
        Ok(Change::Applied)
    }

    pub fn zoom_toggle(&mut self, id: &ObjectId) -> Result<ZoomChange, ModelError> {
        self.require(id)?;
        let obj = self.objects.get_mut(id).expect("checked above");
        let change = match obj.zoom_saved.take() {
            Some(saved) => {
                obj.rect = saved;
                ZoomChange::Restored
            }
            None => {
                obj.zoom_saved = Some(obj.rect);
                obj.rect = Rect::FULL;
                ZoomChange::ZoomedIn
            }
        };
        self.bring_to_front(id);
        Ok(change)
    }

    /// Removes the object. Returns the stop command for its playback, if any.
    pub fn erase_object(&mut self, id: &ObjectId) -> Result<Option<PlaybackCommand>, ModelError> {
        self.require(id)?;
        let stop = self.stop_playing(id);
        self.push_undo(UndoKind::Erase, id);
        self.objects.remove(id);
        self.z_order.retain(|z| z != id);
        if self.pending.as_ref().is_some_and(|p| p.object_id() == id) {
            self.pending = None;
        }
        Ok(stop)
    }

    /// Reverts the most recent move, resize or erase. `None` when there is
    /// nothing to undo.
    ///
    /// Playback state is not rolled back: the restored object keeps whatever
    /// it is currently playing, and a re-created object comes back idle.
    pub fn undo(&mut self) -> Option<UndoKind> {
        let record = self.undo_stack.pop()?;
        let playing = self.objects.get(&record.object_id).and_then(|o| o.playing);
        let mut restored = record.prior_object;
        restored.playing = playing;
        self.objects.insert(record.object_id, restored);
        self.z_order = record.prior_z_order;
        Some(record.kind)
    }

    /// Checks every structural invariant of the board.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let fail = |msg: String| Err(InvariantViolation(msg));
        if self.z_order.len() != self.objects.len() {
            return fail(format!(
                "z-order has {} entries for {} objects",
                self.z_order.len(),
                self.objects.len()
            ));
        }
        let mut seen = std::collections::BTreeSet::new();
        for id in &self.z_order {
            if !seen.insert(id) {
                return fail(format!("`{id}` appears twice in z-order"));
            }
            if !self.objects.contains_key(id) {
                return fail(format!("z-order names missing object `{id}`"));
            }
        }
        for (key, obj) in &self.objects {
            if key != &obj.id {
                return fail(format!("object keyed `{key}` has id `{}`", obj.id));
            }
            if self.spec(key).is_none() {
                return fail(format!("object `{key}` is not declared by the poster"));
            }
            if obj.av_channels.len() > MAX_AV_CHANNELS {
                return fail(format!("object `{key}` has {} AV channels", obj.av_channels.len()));
            }
            // Rect validity is enforced by construction; re-check anyway.
            let r = obj.rect;
            if Rect::new(r.origin.col, r.origin.row, r.width, r.height).is_err() {
                return fail(format!("object `{key}` has invalid rect {r}"));
            }
            if obj.zoom_saved.is_some() && !obj.rect.is_full_board() {
                return fail(format!("object `{key}` is zoomed but not full-board"));
            }
            if let Some(ch) = obj.playing {
                if obj.channel(ch).is_none() {
                    return fail(format!("object `{key}` plays missing channel {ch}"));
                }
            }
        }
        if let Some(p) = &self.pending {
            if !self.objects.contains_key(p.object_id()) {
                return fail(format!("pending gesture targets missing object `{}`", p.object_id()));
            }
        }
        Ok(())
    }

    fn require(&self, id: &ObjectId) -> Result<&MediaObject, ModelError> {
        self.objects
            .get(id)
            .ok_or_else(|| ModelError::UnknownObject(id.clone()))
    }

    fn push_undo(&mut self, kind: UndoKind, id: &ObjectId) {
        self.undo_stack.push(UndoRecord {
            kind,
            object_id: id.clone(),
            prior_object: self.objects[id].clone(),
            prior_z_order: self.z_order.clone(),
        });
    }

    fn bring_to_front(&mut self, id: &ObjectId) {
        self.z_order.retain(|z| z != id);
        self.z_order.push(id.clone());
    }

    // Crate-internal mutators used by gesture, playback and persist.

    pub(crate) fn object_mut(&mut self, id: &ObjectId) -> Option<&mut MediaObject> {
        self.objects.get_mut(id)
    }

    pub(crate) fn objects_mut(&mut self) -> impl Iterator<Item = &mut MediaObject> {
        self.objects.values_mut()
    }

    pub(crate) fn set_pending(&mut self, pending: Option<PendingGesture>) {
        self.pending = pending;
    }

    pub(crate) fn take_pending(&mut self) -> Option<PendingGesture> {
        self.pending.take()
    }

    pub(crate) fn set_resting(&mut self, token: TokenKind, cell: Option<CellCoord>) {
        match cell {
            Some(cell) => self.resting.insert(token, cell),
            None => self.resting.remove(&token),
        };
    }

    /// Replaces the on-board arrangement wholesale. Callers guarantee every
    /// object is declared and ids are unique.
    pub(crate) fn replace_arrangement(&mut self, objects: Vec<MediaObject>) {
        self.z_order = objects.iter().map(|o| o.id.clone()).collect();
        self.objects = objects.into_iter().map(|o| (o.id.clone(), o)).collect();
        self.undo_stack.clear();
        self.pending = None;
    }

    fn stop_playing(&mut self, id: &ObjectId) -> Option<PlaybackCommand> {
        let obj = self.objects.get_mut(id)?;
        let channel = obj.playing.take()?;
        Some(PlaybackCommand {
            object_id: id.clone(),
            channel,
            action: PlaybackAction::Stop,
            media_ref: obj.av_channels[channel.index()].media_ref.clone(),
        })
    }
}
