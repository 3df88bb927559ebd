use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use futures::StreamExt;
use serde_json::{json, Value};
use taleweaver_core::gateway::{PromptBundle, ProviderError};
use taleweaver_core::{ChatProvider, ScriptedProvider, SessionConfig, StubImageService};
use taleweaver_server::api::{router, AppState};
use taleweaver_server::{EchoSummarizer, Script, Services, SessionStore, SystemClock};
use tower::ServiceExt;

const GOLDEN: &str = include_str!("../fixtures/golden_script.json");

fn small() -> SessionConfig {
    SessionConfig { image_size: (64, 64), ..Default::default() }
}

fn build_app(chat: Arc<dyn ChatProvider>, root: &std::path::Path) -> (Router, Arc<AppState>) {
    let services = Services {
        chat,
        summary: Arc::new(EchoSummarizer),
        image: Arc::new(StubImageService),
        clock: Arc::new(SystemClock),
    };
    let state = AppState::new(SessionStore::new(root), small(), services);
    (router(state.clone()), state)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let builder = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => builder.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, bytes.to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router) -> String {
    let (status, body) = call_json(app, "POST", "/sessions", Some(json!({}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["phase"], "storytelling");
    body["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn creation_and_not_found_contracts() {
    let root = tempfile::tempdir().unwrap();
    let (app, _) = build_app(Arc::new(ScriptedProvider::new(Vec::<String>::new())), root.path());
    let id = create(&app).await;
    let (status, _) = call(&app, "GET", &format!("/sessions/{id}/scene.png"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, view) = call_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["weapons"], json!([]));
    assert_eq!(view["reveal"], 0.0);
    let (status, _) = call(&app, "GET", "/sessions/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "GET", "/sessions/00000000-0000-4000-8000-000000000000", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // body-less create also works
    let (status, _) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(status, StatusCode::CREATED);
}

#[tokio::test]
async fn validation_and_provider_errors_map_to_statuses() {
    let root = tempfile::tempdir().unwrap();
    let (app, _) = build_app(Arc::new(ScriptedProvider::new(Vec::<String>::new())), root.path());
    let id = create(&app).await;
    let turns = format!("/sessions/{id}/turns");
    assert_eq!(call(&app, "POST", &turns, Some(json!({"text": "   "}))).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(call(&app, "POST", &turns, Some(json!({"text": "x".repeat(400)}))).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    // empty script: the provider fails
    assert_eq!(call(&app, "POST", &turns, Some(json!({"text": "hello"}))).await.0, StatusCode::BAD_GATEWAY);
    let battle = format!("/sessions/{id}/battle/turns");
    assert_eq!(call(&app, "POST", &battle, Some(json!({"weapon": "sword"}))).await.0, StatusCode::CONFLICT);
    assert_eq!(call(&app, "POST", &battle, Some(json!({"weapon": "spoon"}))).await.0, StatusCode::UNPROCESSABLE_ENTITY);

    // the failed turn is in the transcript
    let (_, records) = call_json(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    let kinds: Vec<&str> = records.as_array().unwrap().iter().map(|r| r["kind"].as_str().unwrap()).collect();
    // one call plus two transport retries
    assert_eq!(kinds, ["session_created", "player_input", "provider_exchange", "provider_exchange", "provider_exchange", "turn_committed"]);
    assert_eq!(records[5]["payload"]["outcome"]["kind"], "error");
}

struct Timeouts;

impl ChatProvider for Timeouts {
    fn complete(&self, _: &PromptBundle) -> Result<String, ProviderError> {
        Err(ProviderError::Timeout)
    }
}

#[tokio::test]
async fn provider_timeout_is_504() {
    let root = tempfile::tempdir().unwrap();
    let (app, _) = build_app(Arc::new(Timeouts), root.path());
    let id = create(&app).await;
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/turns"), Some(json!({"text": "hi"}))).await;
    assert_eq!(status, StatusCode::GATEWAY_TIMEOUT);
}

/// Holds every call until released.
struct Gate {
    entered: AtomicBool,
    open: AtomicBool,
}

impl ChatProvider for Gate {
    fn complete(&self, _: &PromptBundle) -> Result<String, ProviderError> {
        self.entered.store(true, Ordering::SeqCst);
        while !self.open.load(Ordering::SeqCst) {
            std::thread::sleep(Duration::from_millis(2));
        }
        Ok(r#"{"isValid": true, "comment": "", "story": "The night was long."}"#.into())
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_turn_gets_409() {
    let root = tempfile::tempdir().unwrap();
    let gate = Arc::new(Gate { entered: AtomicBool::new(false), open: AtomicBool::new(false) });
    let (app, _) = build_app(gate.clone(), root.path());
    let id = create(&app).await;
    let uri = format!("/sessions/{id}/turns");
    let first = {
        let (app, uri) = (app.clone(), uri.clone());
        tokio::spawn(async move { call(&app, "POST", &uri, Some(json!({"text": "one"}))).await.0 })
    };
    while !gate.entered.load(Ordering::SeqCst) {
        tokio::time::sleep(Duration::from_millis(2)).await;
    }
    assert_eq!(call(&app, "POST", &uri, Some(json!({"text": "two"}))).await.0, StatusCode::CONFLICT);
    gate.open.store(true, Ordering::SeqCst);
    assert_eq!(first.await.unwrap(), StatusCode::OK);
    let (_, view) = call_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(view["turns"].as_array().unwrap().len(), 1);
    // the slot is free again
    assert_eq!(call(&app, "POST", &uri, Some(json!({"text": "three"}))).await.0, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn golden_game_over_http_with_stream() {
    let script = Script::from_json(GOLDEN).unwrap();
    let root = tempfile::tempdir().unwrap();
    let (app, state) = build_app(Arc::new(ScriptedProvider::new(script.provider_replies.clone())), root.path());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(state)).await });

    let id = create(&app).await;
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/stream")).await.unwrap();
    let mut next_frame = async || -> Value {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next()).await.expect("frame in time").unwrap().unwrap();
        serde_json::from_str(msg.to_text().unwrap()).unwrap()
    };

    let mut frames = Vec::new();
    for text in &script.player_inputs {
        let (status, body) = call_json(&app, "POST", &format!("/sessions/{id}/turns"), Some(json!({"text": text}))).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        let frame = next_frame().await;
        assert_eq!(frame["type"], "turn_committed");
        frames.push(frame);
        if !body["outcome"]["weapons_gained"].as_array().unwrap().is_empty() {
            let mut f = next_frame().await;
            if f["type"] == "phase_changed" {
                frames.push(f);
                f = next_frame().await;
            }
            assert_eq!(f["type"], "scene_refreshed");
            frames.push(f);
        }
    }
    let refreshes: Vec<&Value> = frames.iter().filter(|f| f["type"] == "scene_refreshed").collect();
    assert_eq!(refreshes.len(), 4);
    assert_eq!(refreshes[3]["payload"]["version"], 4);
    assert_eq!(refreshes[3]["payload"]["reveal"], 1.0);
    assert!(frames.iter().any(|f| f["type"] == "phase_changed" && f["payload"]["to"] == "battle"));
    let rejected: Vec<&Value> =
        frames.iter().filter(|f| f["type"] == "turn_committed" && f["payload"]["outcome"]["kind"] == "rejected").collect();
    assert_eq!(rejected.len(), 1);

    let (status, png) = call(&app, "GET", &format!("/sessions/{id}/scene.png"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&png[1..4], b"PNG");

    // story turns are closed now
    assert_eq!(call(&app, "POST", &format!("/sessions/{id}/turns"), Some(json!({"text": "more"}))).await.0, StatusCode::CONFLICT);

    let (_, view) = call_json(&app, "GET", &format!("/sessions/{id}"), None).await;
    let arsenal: Vec<String> = view["battle"]["unused"].as_array().unwrap().iter().map(|w| w.as_str().unwrap().to_string()).collect();
    assert_eq!(arsenal.len(), 4);
    let mut last = Value::Null;
    for weapon in &arsenal {
        let (status, body) = call_json(&app, "POST", &format!("/sessions/{id}/battle/turns"), Some(json!({"weapon": weapon}))).await;
        assert_eq!(status, StatusCode::OK);
        for _ in body["report"]["events"].as_array().unwrap() {
            let f = next_frame().await;
            assert_eq!(f["type"], "battle_event");
            assert_eq!(f["payload"]["weapon"], weapon.as_str());
        }
        last = body;
    }
    assert_eq!(last["session"]["phase"], "ended_won");
    assert_eq!(last["session"]["battle"]["player_hp"], 70);
    let (status, _) =
        call(&app, "POST", &format!("/sessions/{id}/battle/turns"), Some(json!({"weapon": arsenal[0].clone()}))).await;
    assert_eq!(status, StatusCode::CONFLICT);

    // a fresh process sees the same session from disk
    let (app2, _) = build_app(Arc::new(ScriptedProvider::new(Vec::<String>::new())), root.path());
    let (status, view2) = call_json(&app2, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view2, last["session"]);
}
