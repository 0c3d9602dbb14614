use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header::CONTENT_TYPE, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::net::TcpListener;

use crate::aggregate::{aggregate, AggregationFailure};
use crate::config::ServiceConfig;
use crate::fanout::fan_out;
use crate::ServiceError;

/// Immutable configuration plus the shared HTTP client.
#[derive(Debug, Clone)]
pub struct AppState {
    pub config: Arc<ServiceConfig>,
    pub client: reqwest::Client,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let client = reqwest::Client::builder()
            .build()
            .map_err(|e| ServiceError::Config(format!("http client: {e}")))?;
        Ok(AppState {
            config: Arc::new(config),
            client,
        })
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/classify", post(classify))
        .route("/healthz", get(|| async { StatusCode::OK }))
        .with_state(state)
}

/// Serves until the listener fails or the process receives Ctrl-C.
pub async fn serve(state: AppState, listener: TcpListener) -> Result<(), ServiceError> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn classify(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    let started = Instant::now();
    let content_type = headers.get(CONTENT_TYPE).and_then(|v| v.to_str().ok());
    let outcomes = match fan_out(&state.client, &state.config.endpoints, body, content_type).await {
        Ok(o) => o,
        Err(e) => return (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    };
    match aggregate(&state.config, outcomes) {
        Ok(decision) => {
            tracing::info!(
                predicted = decision.predicted,
                method = %decision.method,
                elapsed_ms = started.elapsed().as_millis() as u64,
                "classify"
            );
            Json(decision).into_response()
        }
        Err(AggregationFailure(failure)) => {
            tracing::warn!(
                successes = failure.successes,
                quorum = failure.quorum,
                elapsed_ms = started.elapsed().as_millis() as u64,
                "classify failed"
            );
            (StatusCode::SERVICE_UNAVAILABLE, Json(failure)).into_response()
        }
    }
}
