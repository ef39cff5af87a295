//! HTTP and WebSocket front end over the session loops.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use rovergym_core::{make_with, EnvOptions, EnvRegistry};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, watch};
use tokio::task::JoinHandle;
use tower_http::services::ServeDir;

use crate::command::{CommandMessage, BAD_COMMAND};
use crate::session::{Frame, SessionCore, SessionHandle};
use crate::TeleopError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub env_id: String,
    pub seed: u64,
    pub options: EnvOptions,
    pub sim_hz: f64,
    pub broadcast_hz: f64,
    /// Static files (the browser cockpit) served at `/`.
    pub cockpit_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            env_id: "lsd_force_lidar-v0".into(),
            seed: 0,
            options: EnvOptions::default(),
            sim_hz: 50.0,
            broadcast_hz: 20.0,
            cockpit_dir: None,
        }
    }
}

/// Body of the `POST /kill` response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillReport {
    pub stopped: usize,
}

#[derive(Default)]
struct Sessions {
    closed: bool,
    live: HashMap<String, SessionHandle>,
}

struct Shared {
    config: ServeConfig,
    sessions: Mutex<Sessions>,
    shutdown: watch::Sender<bool>,
}

impl Shared {
    /// Channels of session `id`, starting its loop on first use.
    fn session(
        &self,
        id: &str,
    ) -> Result<(mpsc::UnboundedSender<CommandMessage>, watch::Receiver<Frame>), TeleopError> {
        let mut sessions = self.sessions.lock().expect("session table poisoned");
        if sessions.closed {
            return Err(TeleopError::ShutDown);
        }
        if let Some(h) = sessions.live.get(id) {
            return Ok((h.commands.clone(), h.frames.clone()));
        }
        let env = make_with(&self.config.env_id, self.config.seed, &self.config.options)?;
        let handle = SessionHandle::spawn(SessionCore::new(env), self.config.sim_hz, self.config.broadcast_hz)?;
        let channels = (handle.commands.clone(), handle.frames.clone());
        sessions.live.insert(id.to_string(), handle);
        Ok(channels)
    }

    async fn kill_all(&self) -> usize {
        let handles: Vec<SessionHandle> = {
            let mut sessions = self.sessions.lock().expect("session table poisoned");
            sessions.closed = true;
            sessions.live.drain().map(|(_, h)| h).collect()
        };
        let count = handles.len();
        for h in &handles {
            h.signal();
        }
        for h in handles {
            h.join().await;
        }
        self.shutdown.send_replace(true);
        count
    }
}

/// A bound, running teleoperation server.
pub struct Server {
    addr: SocketAddr,
    shared: Arc<Shared>,
    task: JoinHandle<std::io::Result<()>>,
}

/// Validate the environment, bind `addr` and start accepting connections.
/// Sessions are created on first connection to `/session/{id}`.
pub async fn serve(addr: SocketAddr, config: ServeConfig) -> Result<Server, TeleopError> {
    if !(config.sim_hz > 0.0
        && config.sim_hz.is_finite()
        && config.broadcast_hz > 0.0
        && config.broadcast_hz.is_finite())
    {
        return Err(TeleopError::InvalidConfig("rates must be positive and finite".into()));
    }
    make_with(&config.env_id, config.seed, &config.options)?;
    if let Some(dir) = &config.cockpit_dir {
        if !dir.is_dir() {
            return Err(TeleopError::InvalidConfig(format!(
                "cockpit directory {} not found",
                dir.display()
            )));
        }
    }
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|source| TeleopError::BindFailure { addr, source })?;
    let addr = listener
        .local_addr()
        .map_err(|source| TeleopError::BindFailure { addr, source })?;
    let (shutdown, mut shutdown_rx) = watch::channel(false);
    let shared = Arc::new(Shared {
        config,
        sessions: Mutex::new(Sessions::default()),
        shutdown,
    });
    let mut app = Router::new()
        .route("/envs", get(envs))
        .route("/session/{id}", get(session))
        .route("/kill", post(kill));
    if let Some(dir) = &shared.config.cockpit_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let app = app.with_state(shared.clone());
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async move {
                let _ = shutdown_rx.wait_for(|s| *s).await;
            })
            .await
    });
    Ok(Server { addr, shared, task })
}

impl Server {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn config(&self) -> &ServeConfig {
        &self.shared.config
    }

    /// Start session `id` without waiting for a client.
    pub fn open_session(&self, id: &str) -> Result<(), TeleopError> {
        self.shared.session(id).map(|_| ())
    }

    pub fn session_ids(&self) -> Vec<String> {
        let sessions = self.shared.sessions.lock().expect("session table poisoned");
        let mut ids: Vec<String> = sessions.live.keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Stop and join every session loop and close the listener. Returns
    /// the number of sessions stopped; later calls return 0.
    pub async fn kill_all(&self) -> usize {
        self.shared.kill_all().await
    }

    /// Resolves once shutdown has been requested.
    pub async fn shutdown_requested(&self) {
        let _ = self.shared.shutdown.subscribe().wait_for(|s| *s).await;
    }

    /// Wait until the server has shut down, through `kill_all` or `POST /kill`.
    pub async fn wait(self) -> std::io::Result<()> {
        match self.task.await {
            Ok(result) => result,
            Err(e) => Err(std::io::Error::other(e)),
        }
    }
}

async fn envs(State(shared): State<Arc<Shared>>) -> Response {
    match EnvRegistry::with_defaults().listing(&shared.config.options) {
        Ok(listing) => Json(listing).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn kill(State(shared): State<Arc<Shared>>) -> Json<KillReport> {
    Json(KillReport {
        stopped: shared.kill_all().await,
    })
}

async fn session(Path(id): Path<String>, State(shared): State<Arc<Shared>>, ws: WebSocketUpgrade) -> Response {
    match shared.session(&id) {
        Ok((commands, frames)) => ws.on_upgrade(move |socket| client(socket, commands, frames)),
        Err(TeleopError::ShutDown) => StatusCode::SERVICE_UNAVAILABLE.into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn client(
    socket: WebSocket,
    commands: mpsc::UnboundedSender<CommandMessage>,
    mut frames: watch::Receiver<Frame>,
) {
    let (mut tx, mut rx) = socket.split();
    let current = frames.borrow_and_update().json.clone();
    if tx.send(Message::Text(current.as_ref().into())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            changed = frames.changed() => {
                if changed.is_err() {
                    break;
                }
                // newest frame only; a slow client skips intermediate ones
                let json = frames.borrow_and_update().json.clone();
                if tx.send(Message::Text(json.as_ref().into())).await.is_err() {
                    return;
                }
            }
            inbound = rx.next() => {
                let reply = match inbound {
                    Some(Ok(Message::Text(text))) => match CommandMessage::parse(text.as_str()) {
                        Ok(command) => {
                            if commands.send(command).is_err() {
                                break;
                            }
                            command.ack()
                        }
                        Err(_) => BAD_COMMAND.to_string(),
                    },
                    Some(Ok(Message::Binary(_))) => BAD_COMMAND.to_string(),
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                };
                if tx.send(Message::Text(reply.into())).await.is_err() {
                    return;
                }
            }
        }
    }
    let _ = tx.send(Message::Close(None)).await;
}
