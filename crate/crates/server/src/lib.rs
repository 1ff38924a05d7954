//! HTTP and WebSocket access to tortuga sessions.
//!
//! Each session lives in its own task and handles one message at a time.
//! Model calls run on the blocking pool; a reply that arrives after the user
//! has moved on is dropped by the session.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, mpsc, oneshot};

use tortuga::assistant::GenerationParams;
use tortuga::dialog::{Features, UserEvent};
use tortuga::session::{
    create_session, write_jsonl, ConfigRecord, Session, SessionConfig, SessionEvent, TranscriptWriter,
};
use tortuga::ViewModel;

pub const HEARTBEAT: Duration = Duration::from_secs(30);

#[derive(Clone)]
pub struct ServerConfig {
    /// Defaults for new sessions.
    pub session: SessionConfig,
    /// Where transcripts are written, one `<id>.jsonl` per session.
    pub transcript_dir: Option<PathBuf>,
    pub heartbeat: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            session: SessionConfig::default(),
            transcript_dir: None,
            heartbeat: HEARTBEAT,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServerConfig>,
    sessions: Arc<Mutex<HashMap<String, SessionHandle>>>,
}

#[derive(Clone)]
struct SessionHandle {
    commands: mpsc::Sender<Command>,
    events: broadcast::Sender<SessionEvent>,
}

enum Command {
    Event(UserEvent, oneshot::Sender<Vec<SessionEvent>>),
    Transcript(oneshot::Sender<Vec<SessionEvent>>),
    View(oneshot::Sender<ViewModel>),
    Reply(u64, Result<String, tortuga::assistant::BackendError>),
}

/// Body of `POST /sessions`. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreateRequest {
    pub seed: Option<u64>,
    pub backend: Option<String>,
    pub features: Option<Features>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub id: String,
    pub config: ConfigRecord,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: message.into() })).into_response()
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn handle(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.lock().expect("session table poisoned").get(id).cloned()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session table poisoned").len()
    }

    fn spawn(&self, session: Session) -> Result<String, std::io::Error> {
        let id = session.id().to_owned();
        let writer = match &self.config.transcript_dir {
            Some(dir) => {
                let mut w = TranscriptWriter::append(&dir.join(format!("{id}.jsonl")))?;
                w.write(session.transcript())?;
                Some(w)
            }
            None => None,
        };
        let (tx, rx) = mpsc::channel(64);
        let (events, _) = broadcast::channel(256);
        let handle = SessionHandle {
            commands: tx.clone(),
            events: events.clone(),
        };
        tokio::spawn(run_session(session, rx, tx, events, writer));
        self.sessions
            .lock()
            .expect("session table poisoned")
            .insert(id.clone(), handle);
        Ok(id)
    }
}

async fn run_session(
    mut session: Session,
    mut rx: mpsc::Receiver<Command>,
    tx: mpsc::Sender<Command>,
    events: broadcast::Sender<SessionEvent>,
    mut writer: Option<TranscriptWriter>,
) {
    while let Some(cmd) = rx.recv().await {
        let produced = match cmd {
            Command::Event(event, reply) => {
                let produced = session.handle(event);
                let _ = reply.send(produced.clone());
                produced
            }
            Command::Reply(call_id, result) => session.complete(call_id, result),
            Command::Transcript(reply) => {
                let _ = reply.send(session.transcript().to_vec());
                continue;
            }
            Command::View(reply) => {
                let _ = reply.send(session.view().clone());
                continue;
            }
        };
        if let Some(w) = &mut writer {
            if let Err(e) = w.write(&produced) {
                log::error!(
                    "session {}: transcript write failed, no longer persisting: {e}",
                    session.id()
                );
                writer = None;
            }
        }
        for e in produced {
            let _ = events.send(e);
        }
        if let Some(req) = session.in_flight() {
            let backend = session.backend();
            let tx = tx.clone();
            tokio::spawn(async move {
                let result =
                    tokio::task::spawn_blocking(move || backend.complete(&req.turns, &GenerationParams::default()))
                        .await
                        .unwrap_or_else(|e| Err(tortuga::assistant::BackendError::Transport(e.to_string())));
                let _ = tx.send(Command::Reply(req.call_id, result)).await;
            });
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/sessions/{id}/view", get(view))
        .route("/sessions/{id}/events", post(send_event))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(state)
}

async fn create(State(state): State<AppState>, body: Option<Json<CreateRequest>>) -> Response {
    let req = body.map(|Json(r)| r).unwrap_or_default();
    let mut config = state.config.session.clone();
    if let Some(seed) = req.seed {
        config.seed = Some(seed);
    }
    if let Some(backend) = req.backend {
        config.backend = backend;
    }
    if let Some(features) = req.features {
        config.features = features;
    }
    let session = match tokio::task::spawn_blocking(move || create_session(&config)).await {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => return error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let record = session.config_record().clone();
    match state.spawn(session) {
        Ok(id) => (StatusCode::CREATED, Json(CreateResponse { id, config: record })).into_response(),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("cannot open transcript: {e}"),
        ),
    }
}

async fn ask<T>(state: &AppState, id: &str, make: impl FnOnce(oneshot::Sender<T>) -> Command) -> Result<T, Response> {
    let handle = state
        .handle(id)
        .ok_or_else(|| error(StatusCode::NOT_FOUND, format!("no session {id}")))?;
    let (tx, rx) = oneshot::channel();
    handle
        .commands
        .send(make(tx))
        .await
        .map_err(|_| error(StatusCode::GONE, "session stopped"))?;
    rx.await.map_err(|_| error(StatusCode::GONE, "session stopped"))
}

/// The transcript as JSON lines, the same format as the files on disk.
async fn transcript(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match ask(&state, &id, Command::Transcript).await {
        Ok(events) => {
            let mut body = Vec::new();
            write_jsonl(&events, &mut body).expect("writing to memory cannot fail");
            ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
        }
        Err(r) => r,
    }
}

async fn view(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match ask(&state, &id, Command::View).await {
        Ok(v) => Json(v).into_response(),
        Err(r) => r,
    }
}

/// Sends one event and returns the events it produced right away. Model
/// replies arrive later, on the stream.
async fn send_event(State(state): State<AppState>, Path(id): Path<String>, Json(event): Json<UserEvent>) -> Response {
    match ask(&state, &id, |tx| Command::Event(event, tx)).await {
        Ok(events) => Json(events).into_response(),
        Err(r) => r,
    }
}

async fn stream(State(state): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    let Some(handle) = state.handle(&id) else {
        return error(StatusCode::NOT_FOUND, format!("no session {id}"));
    };
    let heartbeat = state.config.heartbeat;
    ws.on_upgrade(move |socket| pump(socket, handle, heartbeat))
}

async fn pump(mut socket: WebSocket, handle: SessionHandle, heartbeat: Duration) {
    let mut events = handle.events.subscribe();
    let mut ticker = tokio::time::interval_at(tokio::time::Instant::now() + heartbeat, heartbeat);
    loop {
        tokio::select! {
            incoming = socket.recv() => {
                let text = match incoming {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                match serde_json::from_str::<UserEvent>(&text) {
                    Ok(event) => {
                        let (tx, _rx) = oneshot::channel();
                        if handle.commands.send(Command::Event(event, tx)).await.is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let body = serde_json::to_string(&ErrorBody { error: e.to_string() }).expect("plain struct");
                        if socket.send(Message::Text(body.into())).await.is_err() {
                            break;
                        }
                    }
                }
            }
            event = events.recv() => {
                match event {
                    Ok(e) => {
                        let text = serde_json::to_string(&e).expect("session events always serialize");
                        if socket.send(Message::Text(text.into())).await.is_err() {
                            break;
                        }
                    }
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        log::warn!("stream client fell behind by {n} events; closing");
                        break;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                }
            }
            _ = ticker.tick() => {
                if socket.send(Message::Ping(Vec::new().into())).await.is_err() {
                    break;
                }
            }
        }
    }
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config))).await
}
