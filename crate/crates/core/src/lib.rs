//! Board engine for tangible multimedia posters.
//!
//! A poster is a set of media objects laid out on an 8×8 grid. Physical
//! tokens placed on the grid move, resize, zoom, play, stop, erase and undo
//! those objects. This crate holds the whole engine:
//!
//! - [`model`]: the board, its geometry and the primitive operations
//! - [`gesture`]: the token grammar that turns antenna events into operations
//! - [`playback`]: per-object audio/video state and renderer commands
//! - [`persist`]: poster manifests, layout snapshots and board views
//! - [`devlog`]: event logs, replay and dead-spot simulation
//! - [`analytics`]: usage summaries over completed operations
//!
//! ```
//! use storygrid_core::prelude::*;
//!
//! let manifest = parse_manifest(r#"{
//!     "poster_id": "demo",
//!     "objects": [{"id": "witches", "image_ref": "witches.png"}]
//! }"#).unwrap();
//! let mut board = load_poster(&manifest).board;
//! let at = |c, r| CellCoord::new(c, r).unwrap();
//!
//! consume(&mut board, &TokenEvent::placed(0, TokenKind::Zoomer, at(0, 0)));
//! assert!(board.object(&"witches".into()).unwrap().rect.is_full_board());
//! ```

pub mod analytics;
pub mod devlog;
pub mod gesture;
pub mod model;
pub mod persist;
pub mod playback;
pub mod signal;

pub mod prelude {
    pub use crate::analytics::{summarize, TokenUsage, UsageSummary, DEFAULT_BREAK_GAP_S};
    pub use crate::devlog::{parse_log, replay, write_log, LogError, ReplayConfig, ReplayReport};
    pub use crate::gesture::{consume, CompletedOp, Outcome, PendingGesture, Phase, TokenEvent, TokenKind};
    pub use crate::model::{
        AvComponent, AvKind, Board, CellCoord, Channel, Edge, MediaObject, ModelError, ObjectId, ObjectSpec, Rect,
    };
    pub use crate::persist::{
        load_poster, manifest_to_json, parse_manifest, parse_snapshot, restore_layout, save_layout, snapshot_to_json,
        BoardView, LayoutSnapshot, PosterManifest,
    };
    pub use crate::playback::{PlaybackAction, PlaybackCommand};
    pub use crate::signal::{Signal, SignalCode};
}
