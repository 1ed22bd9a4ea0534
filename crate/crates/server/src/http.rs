//! HTTP routes and the WebSocket stream.
//!
//! | method | path                      |                                        |
//! |--------|---------------------------|----------------------------------------|
//! | POST   | `/posters`                | upload a manifest                      |
//! | GET    | `/posters`                | list posters                           |
//! | POST   | `/sessions`               | `{"poster_id": ..}` starts a session   |
//! | GET    | `/sessions/{id}/state`    | current `state` message                |
//! | GET    | `/sessions/{id}/log`      | accepted token events as JSON-lines    |
//! | GET    | `/sessions/{id}/stream`   | WebSocket upgrade                      |

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::mpsc::unbounded_channel;

use crate::hub::{Hub, ServiceError};

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/posters", post(upload_poster).get(list_posters))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/log", get(session_log))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(hub)
}

/// Serve `hub` on an already bound listener until the process exits.
pub async fn serve(listener: tokio::net::TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    axum::serve(listener, router(hub)).await
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownPoster(_) | ServiceError::UnknownSession(_) | ServiceError::UnknownLayout(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}

async fn upload_poster(State(hub): State<Arc<Hub>>, body: String) -> Result<impl IntoResponse, ServiceError> {
    let poster_id = hub.upload_poster(&body)?;
    Ok((StatusCode::CREATED, Json(json!({ "poster_id": poster_id }))))
}

async fn list_posters(State(hub): State<Arc<Hub>>) -> impl IntoResponse {
    Json(hub.posters())
}

#[derive(Deserialize)]
struct NewSession {
    poster_id: String,
}

async fn create_session(
    State(hub): State<Arc<Hub>>,
    Json(req): Json<NewSession>,
) -> Result<impl IntoResponse, ServiceError> {
    let session_id = hub.create_session(&req.poster_id)?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": session_id }))))
}

async fn session_state(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(hub.state(&id)?))
}

async fn session_log(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    let log = hub.event_log(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], log))
}

async fn stream(
    State(hub): State<Arc<Hub>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ServiceError> {
    // Fail before upgrading so unknown sessions get a plain 404.
    hub.state(&id)?;
    Ok(ws.on_upgrade(move |socket| serve_socket(hub, id, socket)))
}

async fn serve_socket(hub: Arc<Hub>, session_id: String, mut socket: WebSocket) {
    let (tx, mut rx) = unbounded_channel();
    if hub.subscribe(&session_id, tx.clone()).is_err() {
        return;
    }
    tracing::debug!(session = %session_id, "subscriber connected");
    loop {
        tokio::select! {
            outbound = rx.recv() => {
                let Some(msg) = outbound else { break };
                if socket.send(Message::Text(msg.to_json().into())).await.is_err() {
                    break;
                }
            }
            inbound = socket.recv() => {
                match inbound {
                    Some(Ok(Message::Text(text))) => {
                        // Broadcasts for this message are queued before the reply.
                        let reply = hub.handle_text(&session_id, text.as_str());
                        if tx.send(reply).is_err() {
                            break;
                        }
                    }
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => {}
                }
            }
        }
    }
    tracing::debug!(session = %session_id, "subscriber disconnected");
}
