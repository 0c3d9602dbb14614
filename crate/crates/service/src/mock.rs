//! Fixture-backed stand-in for a deployed model: answers
//! `POST /invocations` with a stored confidence vector.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use negfuse_core::io::PredictionMap;
use negfuse_core::PredictionVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::wire::ModelResponse;

/// What to return for a payload with no fixture entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownPayload {
    #[default]
    NotFound,
    /// A uniform vector of `1/K`.
    Uniform,
}

/// Mock-model settings as read from its configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockConfig {
    /// Prediction file used as the fixture.
    pub fixture: std::path::PathBuf,
    pub class_count: usize,
    #[serde(default)]
    pub latency_ms: u64,
    /// Fraction of requests answered with HTTP 500, in [0, 1].
    #[serde(default)]
    pub failure_rate: f64,
    #[serde(default)]
    pub unknown: UnknownPayload,
}

#[derive(Debug)]
pub struct MockModel {
    fixture: HashMap<String, PredictionVector>,
    class_count: usize,
    latency: Duration,
    failure_rate: f64,
    unknown: UnknownPayload,
    requests: AtomicU64,
}

impl MockModel {
    /// Fixture keys are matched against the UTF-8 payload (trimmed) first,
    /// then against the lowercase hex SHA-256 of the raw payload.
    pub fn new(fixture: PredictionMap, class_count: usize) -> Self {
        MockModel {
            fixture: fixture.into_iter().collect(),
            class_count,
            latency: Duration::ZERO,
            failure_rate: 0.0,
            unknown: UnknownPayload::NotFound,
            requests: AtomicU64::new(0),
        }
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    pub fn with_failure_rate(mut self, rate: f64) -> Self {
        self.failure_rate = rate.clamp(0.0, 1.0);
        self
    }

    pub fn with_unknown(mut self, unknown: UnknownPayload) -> Self {
        self.unknown = unknown;
        self
    }

    pub fn from_config(config: &MockConfig) -> Result<Self, crate::ServiceError> {
        if !(0.0..=1.0).contains(&config.failure_rate) {
            return Err(crate::ServiceError::Config(format!(
                "failure_rate {} is outside [0, 1]",
                config.failure_rate
            )));
        }
        let fixture = negfuse_core::io::load_predictions(&config.fixture, config.class_count)?;
        Ok(MockModel::new(fixture, config.class_count)
            .with_latency(Duration::from_millis(config.latency_ms))
            .with_failure_rate(config.failure_rate)
            .with_unknown(config.unknown))
    }

    pub fn lookup(&self, payload: &[u8]) -> Option<&PredictionVector> {
        if let Ok(text) = std::str::from_utf8(payload) {
            if let Some(v) = self.fixture.get(text.trim()) {
                return Some(v);
            }
        }
        self.fixture.get(&payload_digest(payload))
    }

    /// Deterministic per request number: request `r` fails when a hash of
    /// `r` mapped to [0, 1) falls below the failure rate.
    fn should_fail(&self, request: u64) -> bool {
        if self.failure_rate <= 0.0 {
            return false;
        }
        let unit = (splitmix64(request) >> 11) as f64 / (1u64 << 53) as f64;
        unit < self.failure_rate
    }

    pub fn router(self) -> Router {
        Router::new()
            .route("/invocations", post(invocations))
            .route("/healthz", get(|| async { StatusCode::OK }))
            .with_state(Arc::new(self))
    }
}

/// Lowercase hex SHA-256, the fallback fixture key for binary payloads.
pub fn payload_digest(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

async fn invocations(State(model): State<Arc<MockModel>>, body: Bytes) -> Response {
    let request = model.requests.fetch_add(1, Ordering::Relaxed);
    if !model.latency.is_zero() {
        tokio::time::sleep(model.latency).await;
    }
    if model.should_fail(request) {
        return (StatusCode::INTERNAL_SERVER_ERROR, "injected failure").into_response();
    }
    let confidences = match (model.lookup(&body), model.unknown) {
        (Some(v), _) => v.as_slice().to_vec(),
        (None, UnknownPayload::Uniform) => vec![1.0 / model.class_count as f64; model.class_count],
        (None, UnknownPayload::NotFound) => return (StatusCode::NOT_FOUND, "unknown payload").into_response(),
    };
    tracing::info!(request, classes = confidences.len(), "invocation");
    Json(ModelResponse { confidences }).into_response()
}
