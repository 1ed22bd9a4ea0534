//! Compiles the code in `book/src` as doctests, one module per chapter.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/board.md")]
pub mod board {}
#[doc = include_str!("../../../book/src/gestures.md")]
pub mod gestures {}
#[doc = include_str!("../../../book/src/playback.md")]
pub mod playback {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
#[doc = include_str!("../../../book/src/replay.md")]
pub mod replay {}
#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}
