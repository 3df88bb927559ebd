//! HTTP and WebSocket API.
//!
//! | route | |
//! |---|---|
//! | `POST /sessions` | create, 201 `{id, phase, ...}` |
//! | `GET /sessions/{id}` | session view |
//! | `POST /sessions/{id}/turns` | `{text}` story turn |
//! | `POST /sessions/{id}/battle/turns` | `{weapon}` battle action |
//! | `GET /sessions/{id}/scene.png` | composited scene, 404 before the first |
//! | `GET /sessions/{id}/transcript` | every record so far |
//! | `GET /sessions/{id}/stream` | WebSocket of `{type, seq, payload}` frames |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use taleweaver_core::battle::BattleError;
use taleweaver_core::session::BattleReport;
use taleweaver_core::{
    BattleEvent, GameSession, Phase, SessionConfig, SessionError, SessionId, StoryTurn, TurnOutcome, Weapon,
    WeaponKind,
};
use tokio::net::TcpListener;
use tokio::sync::{broadcast, RwLock};

use crate::host::{HostError, Services, SessionHost};
use crate::store::SessionStore;

pub struct AppState {
    pub store: SessionStore,
    pub config: SessionConfig,
    pub services: Services,
    sessions: RwLock<HashMap<SessionId, Arc<SessionHost>>>,
}

impl AppState {
    pub fn new(store: SessionStore, config: SessionConfig, services: Services) -> Arc<Self> {
        Arc::new(Self { store, config, services, sessions: RwLock::new(HashMap::new()) })
    }

    /// A live session, reopened from disk if this process has not seen it.
    async fn host(&self, id: &str) -> Result<Arc<SessionHost>, ApiError> {
        let id: SessionId = id.parse().map_err(|_| ApiError::NotFound("no such session"))?;
        if let Some(h) = self.sessions.read().await.get(&id) {
            return Ok(h.clone());
        }
        let dir = self.store.session_dir(id);
        if !dir.exists() {
            return Err(ApiError::NotFound("no such session"));
        }
        let services = self.services.clone();
        let host = blocking(move || SessionHost::open(dir, services)).await?;
        let mut sessions = self.sessions.write().await;
        Ok(sessions.entry(id).or_insert_with(|| Arc::new(host)).clone())
    }
}

#[derive(Debug)]
pub enum ApiError {
    Host(HostError),
    NotFound(&'static str),
    BadRequest(String),
    Internal(String),
}

impl From<HostError> for ApiError {
    fn from(e: HostError) -> Self {
        ApiError::Host(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, m.to_string()),
            ApiError::BadRequest(m) => (StatusCode::UNPROCESSABLE_ENTITY, m),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
            ApiError::Host(e) => (host_status(&e), e.to_string()),
        };
        if status.is_server_error() {
            tracing::error!(%status, message, "request failed");
        }
        (status, Json(json!({ "error": message }))).into_response()
    }
}

fn host_status(e: &HostError) -> StatusCode {
    match e {
        HostError::Busy => StatusCode::CONFLICT,
        HostError::Session(s) => match s {
            SessionError::WrongPhase(_) => StatusCode::CONFLICT,
            SessionError::EmptyInput | SessionError::InputTooLong { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::ProviderFailure(_) => StatusCode::BAD_GATEWAY,
            SessionError::Timeout => StatusCode::GATEWAY_TIMEOUT,
            SessionError::Battle(BattleError::WeaponNotOwned(_)) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::Battle(BattleError::UnsafeConfig(_)) | SessionError::InvalidConfig(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            SessionError::Battle(_) => StatusCode::CONFLICT,
        },
        HostError::Store(_) | HostError::Replay(_) | HostError::Scene(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, HostError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::Internal(e.to_string()))?.map_err(ApiError::Host)
}

/// What clients see of a session: everything except the image data.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SessionView {
    pub id: SessionId,
    pub phase: Phase,
    pub turns: Vec<StoryTurn>,
    pub weapons: Vec<Weapon>,
    pub weapon_threshold: usize,
    pub reveal: f64,
    pub scene_version: u32,
    pub battle: Option<BattleView>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct BattleView {
    pub player_hp: u32,
    pub king_hp: u32,
    pub unused: Vec<WeaponKind>,
    pub log: Vec<BattleEvent>,
}

impl From<&GameSession> for SessionView {
    fn from(s: &GameSession) -> Self {
        Self {
            id: s.id,
            phase: s.phase,
            turns: s.turns.clone(),
            weapons: s.weapons.clone(),
            weapon_threshold: s.config.weapon_threshold,
            reveal: s.reveal_fraction(),
            scene_version: s.scene_version(),
            battle: s.battle.as_ref().map(|b| BattleView {
                player_hp: b.player_hp,
                king_hp: b.king_hp,
                unused: b.unused().collect(),
                log: b.turn_log.clone(),
            }),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct CreateRequest {
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct TurnRequest {
    pub text: String,
}

#[derive(Debug, Deserialize)]
pub struct BattleRequest {
    pub weapon: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnResponse {
    pub outcome: TurnOutcome,
    pub session: SessionView,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BattleResponse {
    pub report: BattleReport,
    pub session: SessionView,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turns", post(post_turn))
        .route("/sessions/{id}/battle/turns", post(post_battle))
        .route("/sessions/{id}/scene.png", get(get_scene))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .route("/sessions/{id}/stream", get(stream))
        .with_state(state)
}

async fn create_session(State(state): State<Arc<AppState>>, body: Option<Json<CreateRequest>>) -> Result<Response, ApiError> {
    let seed = body.and_then(|Json(b)| b.seed).unwrap_or_else(rand::random);
    let id = SessionId::random_from(rand::random());
    let dir = state.store.session_dir(id);
    let (config, services) = (state.config.clone(), state.services.clone());
    let host = blocking(move || SessionHost::create(dir, id, seed, config, services)).await?;
    let view = SessionView::from(&*host.snapshot());
    state.sessions.write().await.insert(id, Arc::new(host));
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let host = state.host(&id).await?;
    Ok(Json(SessionView::from(&*host.snapshot())))
}

async fn post_turn(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<TurnRequest>,
) -> Result<Json<TurnResponse>, ApiError> {
    let host = state.host(&id).await?;
    let h = host.clone();
    let report = blocking(move || h.play_turn(&req.text)).await?;
    if let Some(generation) = report.refresh {
        let h = host.clone();
        tokio::task::spawn_blocking(move || {
            if let Err(e) = h.refresh(generation) {
                tracing::warn!(error = %e, "scene refresh failed");
            }
        });
    }
    Ok(Json(TurnResponse { outcome: report.outcome, session: SessionView::from(&*host.snapshot()) }))
}

async fn post_battle(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<BattleRequest>,
) -> Result<Json<BattleResponse>, ApiError> {
    let host = state.host(&id).await?;
    let weapon: WeaponKind = req.weapon.parse().map_err(|_| ApiError::BadRequest(format!("unknown weapon {:?}", req.weapon)))?;
    let h = host.clone();
    let report = blocking(move || h.battle(weapon)).await?;
    Ok(Json(BattleResponse { report, session: SessionView::from(&*host.snapshot()) }))
}

async fn get_scene(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let host = state.host(&id).await?;
    let image = host.scene_image().ok_or(ApiError::NotFound("no scene yet"))?;
    let png = image.to_png().map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "image/png"), (header::CACHE_CONTROL, "no-store")], png).into_response())
}

async fn get_transcript(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let host = state.host(&id).await?;
    let records = blocking(move || host.transcript()).await?;
    Ok(Json(records).into_response())
}

async fn stream(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let host = state.host(&id).await?;
    let frames = host.subscribe();
    Ok(ws.on_upgrade(move |socket| forward(socket, frames)))
}

async fn forward(mut socket: WebSocket, mut frames: broadcast::Receiver<crate::transcript::Frame>) {
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok(frame) => {
                    let text = serde_json::to_string(&frame).expect("frame serializes");
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        return;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => tracing::warn!(skipped = n, "stream client lagging"),
                Err(broadcast::error::RecvError::Closed) => return,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: String, source: std::io::Error },
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

pub async fn bind(addr: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|source| ServeError::BindFailure { addr: addr.into(), source })
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: Arc<AppState>) -> Result<(), ServeError> {
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    tracing::info!(?addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
