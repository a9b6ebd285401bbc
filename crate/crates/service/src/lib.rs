//! HTTP JSON API over an archive.
//!
//! Every route lives under `/api`. Clients first `POST /api/sessions` with
//! an actor name and send the returned token as `Authorization: Bearer`.
//! Work context is passed explicitly with each search; the server keeps no
//! per-session notion of the current activity.
//!
//! Errors come back as `{"error": {"code", "message"}}` with 404 for
//! unknown path resources, 409 for lifecycle and edge conflicts, 422 for
//! invalid content, 401 without a session and 403 for admin routes.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

use std::io;

use tokio::net::TcpListener;

pub use api::router;
pub use config::{ConfigError, ScoringConfig, ServiceConfig};
pub use error::ApiError;
pub use state::{ApiSession, AppState};

/// Binds the configured address and serves until ctrl-c.
pub async fn serve(state: AppState) -> io::Result<()> {
    let listener = TcpListener::bind(&state.config().listen).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
