//! Live teleoperation sessions served over WebSocket.
//!
//! Clients connect to `/session/{id}`, send [`CommandMessage`] JSON and
//! receive `RenderFrame` JSON at the broadcast rate. `GET /envs` lists the
//! registry and `POST /kill` stops every session and the listener.

pub mod command;
pub mod server;
pub mod session;

use std::net::SocketAddr;

use rovergym_core::EnvError;
use thiserror::Error;

pub use command::{CommandError, CommandMessage, TwistCommand, BAD_COMMAND};
pub use server::{serve, KillReport, ServeConfig, Server};
pub use session::{Frame, SessionCore, TickOutcome};

#[derive(Debug, Error)]
pub enum TeleopError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("invalid serve configuration: {0}")]
    InvalidConfig(String),
    #[error("server has been shut down")]
    ShutDown,
}
