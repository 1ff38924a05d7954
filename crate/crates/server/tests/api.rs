use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

use tortuga::session::{read_jsonl, Payload, SessionEvent};
use tortuga::ViewModel;
use tortuga_server::{router, AppState, CreateResponse, ServerConfig};

fn state(heartbeat: Duration, dir: Option<std::path::PathBuf>) -> AppState {
    let mut config = ServerConfig {
        heartbeat,
        transcript_dir: dir,
        ..ServerConfig::default()
    };
    config.session.seed = Some(42);
    AppState::new(config)
}

async fn call(state: &AppState, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req
        .body(body.map(|b| Body::from(b.to_owned())).unwrap_or_default())
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn create(state: &AppState, body: Option<&str>) -> CreateResponse {
    let (status, bytes) = call(state, "POST", "/sessions", body).await;
    assert_eq!(status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&bytes));
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::test]
async fn create_echoes_config() {
    let st = state(Duration::from_secs(30), None);
    let r = create(&st, None).await;
    assert_eq!(r.config.seed, 42);
    assert_eq!(r.config.backend, "mock");
    let r = create(&st, Some(r#"{"seed": 7, "features": {"assistant": false}}"#)).await;
    assert_eq!(r.config.seed, 7);
    assert!(!r.config.features.assistant);
    assert_eq!(st.session_count(), 2);
}

#[tokio::test]
async fn unknown_backend_is_a_bad_request() {
    let st = state(Duration::from_secs(30), None);
    let (status, body) = call(&st, "POST", "/sessions", Some(r#"{"backend": "nope"}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(String::from_utf8_lossy(&body).contains("unknown backend `nope`"));
}

#[tokio::test]
async fn missing_session_is_404() {
    let st = state(Duration::from_secs(30), None);
    assert_eq!(
        call(&st, "GET", "/sessions/zzz/view", None).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        call(&st, "GET", "/sessions/zzz/transcript", None).await.0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn events_update_view_and_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let st = state(Duration::from_secs(30), Some(dir.path().to_owned()));
    let id = create(&st, None).await.id;
    let (status, body) = call(
        &st,
        "POST",
        &format!("/sessions/{id}/events"),
        Some(r#"{"event": "raw-message", "data": "create-turtles 100"}"#),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let events: Vec<SessionEvent> = serde_json::from_slice(&body).unwrap();
    assert!(matches!(events.last().unwrap().payload, Payload::ViewDelta(_)));

    let (_, body) = call(&st, "GET", &format!("/sessions/{id}/view"), None).await;
    let view: ViewModel = serde_json::from_slice(&body).unwrap();
    assert_eq!(view.turtles.len(), 100);

    let (_, body) = call(&st, "GET", &format!("/sessions/{id}/transcript"), None).await;
    let served = read_jsonl(&body[..]).unwrap();
    assert_eq!(served.len(), 5);
    let on_disk = read_jsonl(std::io::BufReader::new(
        std::fs::File::open(dir.path().join(format!("{id}.jsonl"))).unwrap(),
    ))
    .unwrap();
    assert_eq!(served, on_disk);
}

async fn spawn_server(st: AppState) -> std::net::SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(st)).await.unwrap() });
    addr
}

async fn next_event<S>(ws: &mut S) -> SessionEvent
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .unwrap()
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

#[tokio::test]
async fn stream_carries_explain_flow() {
    let st = state(Duration::from_secs(30), None);
    let id = create(&st, None).await.id;
    let addr = spawn_server(st).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream"))
        .await
        .unwrap();

    ws.send(Message::text(
        r#"{"event":"raw-message","data":"ask patches [ set color red ]"}"#,
    ))
    .await
    .unwrap();
    let mut options = None;
    while options.is_none() {
        if let Payload::Action(tortuga::dialog::EngineAction::OfferOptions(o)) = next_event(&mut ws).await.payload {
            options = Some(o);
        }
    }
    assert_eq!(options.unwrap(), ["Help me fix this code", "Explain the error"]);

    ws.send(Message::text(
        r#"{"event":"option-selected","data":"Explain the error"}"#,
    ))
    .await
    .unwrap();
    loop {
        let e = next_event(&mut ws).await;
        if let Payload::Action(tortuga::dialog::EngineAction::Say(s)) = e.payload {
            assert!(s.contains("PCOLOR"));
            break;
        }
    }
}

#[tokio::test]
async fn stream_rejects_garbage_and_pings() {
    let st = state(Duration::from_millis(50), None);
    let id = create(&st, None).await.id;
    let addr = spawn_server(st).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream"))
        .await
        .unwrap();
    ws.send(Message::text("not json")).await.unwrap();
    let mut saw_error = false;
    let mut saw_ping = false;
    while !(saw_error && saw_ping) {
        match tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .unwrap()
            .unwrap()
            .unwrap()
        {
            Message::Text(t) => saw_error |= t.contains("\"error\""),
            Message::Ping(_) => saw_ping = true,
            _ => {}
        }
    }
}
