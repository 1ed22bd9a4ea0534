//! Session service for storygrid boards.
//!
//! The [`Hub`] owns posters and live sessions and is usable on its own;
//! [`http::router`] exposes it over HTTP and a JSON WebSocket stream.

pub mod http;
pub mod hub;
pub mod protocol;

pub use hub::{Ack, Hub, PosterInfo, ServiceError};
pub use protocol::{ClientMessage, ServerMessage};
